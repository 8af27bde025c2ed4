//! Monte Carlo sweeps over one parameter, with closed-form overlays where
//! they exist, and the preset sweeps behind each figure.

mod recipes;
mod stats;

pub use recipes::{figure_recipes, recipe, Recipe};
pub use stats::Accumulator;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{optimal_phases, random_phases, PhaseDesign};
use crate::channel::{draw_channels, equivalent_channels};
use crate::error::{invalid, Error, Result};
use crate::estimation::{
    combine, distortion_power, lmmse_stats, simulate_pilot_rx_for, LmmseStats, PilotConfig, Pilots,
};
use crate::geometry::{derive_geometry, LinkGeometry};
use crate::noise::RngStream;
use crate::rates::{
    noma_rates_imperfect, oma_rates, optimal_decoding_fraction, time_share, RateInputs, SicMode,
};
use crate::scene::{SceneConfig, Side};

/// Stream index reserved for the random phase design of a sweep point.
pub const DESIGN_STREAM: u64 = u64::MAX;

/// Trials per reduction chunk; fixed so results do not depend on the thread
/// count.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Average received SNR `γ` in dB.
    SnrDb,
    /// Elements per panel.
    NElements,
    /// Pilot length `K`.
    PilotLen,
    /// Decoding-order share `β` for NOMA and resource share `B` for OMA.
    Fraction,
    /// SIC imperfection `η`.
    Eta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::NElements => "n_elements",
            Axis::PilotLen => "pilot_len_K",
            Axis::Fraction => "fraction",
            Axis::Eta => "eta",
        }
    }

    /// Whether a value on this axis changes the channel or its statistics.
    fn reshapes_channel(self) -> bool {
        matches!(self, Axis::SnrDb | Axis::NElements | Axis::PilotLen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Lmmse,
    Ls,
    /// The receiver knows `h` exactly.
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Optimal,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaRule {
    Fixed(f64),
    /// Per realization, decode the weaker user first.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    NmseLmmse,
    NmseLs,
    SumRateNoma,
    RateTNoma,
    RateRNoma,
    SumRateOma,
    RateTOma,
    RateROma,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::NmseLmmse => "nmse_lmmse",
            Metric::NmseLs => "nmse_ls",
            Metric::SumRateNoma => "sum_rate_noma",
            Metric::RateTNoma => "rate_t_noma",
            Metric::RateRNoma => "rate_r_noma",
            Metric::SumRateOma => "sum_rate_oma",
            Metric::RateTOma => "rate_t_oma",
            Metric::RateROma => "rate_r_oma",
        }
    }

    fn needs_pilots(self) -> bool {
        matches!(self, Metric::NmseLmmse | Metric::NmseLs)
    }

    fn is_oma(self) -> bool {
        matches!(self, Metric::SumRateOma | Metric::RateTOma | Metric::RateROma)
    }
}

/// A one-dimensional Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub scene: SceneConfig,
    pub pilot_len: usize,
    /// Average received SNRs `γ_i = ρ_i ϱ_a ϱ_i / σ_w²`. On the SNR axis the
    /// axis value replaces `snr_t_db` and `snr_r_db` keeps its offset.
    pub snr_t_db: f64,
    pub snr_r_db: f64,
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub sic: SicMode,
    pub phase_design: DesignKind,
    pub beta: BetaRule,
    pub fraction_b: f64,
    pub metrics: Vec<Metric>,
}

impl SweepSpec {
    /// Perfect-SIC LMMSE sum-rate sweep over SNR on the reference scene.
    pub fn new(name: impl Into<String>, axis: Axis, axis_values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            scene: SceneConfig::default(),
            pilot_len: 2,
            snr_t_db: 0.0,
            snr_r_db: 0.0,
            axis,
            axis_values,
            trials: 10_000,
            seed: 1,
            estimator: Estimator::Lmmse,
            sic: SicMode::Perfect,
            phase_design: DesignKind::Optimal,
            beta: BetaRule::Fixed(0.5),
            fraction_b: 0.5,
            metrics: vec![Metric::SumRateNoma],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        if self.metrics.is_empty() {
            return Err(invalid("metrics", "at least one metric is required"));
        }
        if self.axis_values.is_empty() {
            return Err(invalid("axis_values", "must not be empty"));
        }
        if self.axis_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("axis_values", "must be finite"));
        }
        if self.axis_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("axis_values", "must be strictly increasing"));
        }
        for (name, v) in [("snr_t_db", self.snr_t_db), ("snr_r_db", self.snr_r_db)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        check_open_fraction("fraction_B", self.fraction_b)?;
        if let BetaRule::Fixed(b) = self.beta {
            if !(0.0..=1.0).contains(&b) {
                return Err(invalid("beta", format!("must lie in [0, 1], got {b}")));
            }
        }
        let eta = self.sic.eta();
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", format!("must lie in [0, 1], got {eta}")));
        }
        for &v in &self.axis_values {
            match self.axis {
                Axis::SnrDb => {}
                Axis::NElements => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(invalid("n_elements", format!("must be a positive integer, got {v}")));
                    }
                }
                Axis::PilotLen => {
                    if v < 2.0 || v.fract() != 0.0 {
                        return Err(invalid("pilot_len_K", format!("must be an integer >= 2, got {v}")));
                    }
                }
                Axis::Fraction => check_open_fraction("fraction", v)?,
                Axis::Eta => {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(invalid("eta", format!("must lie in [0, 1], got {v}")));
                    }
                }
            }
        }
        if self.axis != Axis::PilotLen && self.pilot_len < 2 {
            return Err(invalid("pilot_len_K", format!("must be >= 2, got {}", self.pilot_len)));
        }
        Ok(())
    }
}

fn check_open_fraction(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(name, format!("must lie in (0, 1), got {v}")));
    }
    Ok(())
}

/// One (axis value, metric) cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub axis_value: f64,
    pub metric: Metric,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub closed_form: Option<f64>,
}

impl SeriesResult {
    /// `|mc_mean − closed_form| / |closed_form|`.
    pub fn relative_deviation(&self) -> Option<f64> {
        self.closed_form
            .filter(|c| *c != 0.0)
            .map(|c| (self.mc_mean - c).abs() / c.abs())
    }
}

/// Powers `ρ_i` hitting the target average SNRs, `ρ_i = γ_i σ_w² / (ϱ_a ϱ_i)`.
pub fn powers_for_snr(geom: &LinkGeometry, scene: &SceneConfig, snr_t_db: f64, snr_r_db: f64) -> (f64, f64) {
    let solve = |db: f64, side: Side| 10f64.powf(db / 10.0) * scene.noise_power / geom.cascade_gain(side);
    (solve(snr_t_db, Side::Transmit), solve(snr_r_db, Side::Reflect))
}

/// Everything fixed across the trials of one sweep point.
struct PointContext {
    scene: SceneConfig,
    geom: LinkGeometry,
    design: PhaseDesign,
    pilots: Pilots,
    lmmse: [LmmseStats; 2],
    ls_err: [f64; 2],
    rho: (f64, f64),
}

/// Rate-side knobs that do not touch the channel.
#[derive(Debug, Clone, Copy)]
struct Variant {
    beta: BetaRule,
    fraction_b: f64,
    eta: f64,
}

fn point_context(spec: &SweepSpec, axis_value: Option<f64>) -> Result<PointContext> {
    let mut scene = spec.scene.clone();
    let mut pilot_len = spec.pilot_len;
    let (mut snr_t, mut snr_r) = (spec.snr_t_db, spec.snr_r_db);
    match (spec.axis, axis_value) {
        (Axis::SnrDb, Some(v)) => {
            snr_r += v - snr_t;
            snr_t = v;
        }
        (Axis::NElements, Some(v)) => scene.set_elements(v as usize),
        (Axis::PilotLen, Some(v)) => pilot_len = v as usize,
        _ => {}
    }
    let geom = derive_geometry(&scene)?;
    let design = match spec.phase_design {
        DesignKind::Optimal => optimal_phases(&geom, &scene),
        DesignKind::Random => random_phases(&scene, &mut RngStream::new(spec.seed, DESIGN_STREAM).rng()),
    };
    let rho = powers_for_snr(&geom, &scene, snr_t, snr_r);
    let pilots = Pilots::new(PilotConfig::new(pilot_len, rho.0, rho.1)?)?;
    let lmmse = lmmse_stats(&design, &geom, &scene, &pilots.config)?;
    let zeta = distortion_power(&[lmmse[0].moments, lmmse[1].moments], &scene, &pilots.config);
    let ls_err = [lmmse[0].pilot_gain, lmmse[1].pilot_gain].map(|g| (zeta + scene.noise_power) / (g * g));
    Ok(PointContext {
        scene,
        geom,
        design,
        pilots,
        lmmse,
        ls_err,
        rho,
    })
}

fn variants(spec: &SweepSpec) -> Vec<Variant> {
    let base = Variant {
        beta: spec.beta,
        fraction_b: spec.fraction_b,
        eta: spec.sic.eta(),
    };
    match spec.axis {
        Axis::Fraction => spec
            .axis_values
            .iter()
            .map(|&v| Variant {
                beta: BetaRule::Fixed(v),
                fraction_b: v,
                ..base
            })
            .collect(),
        Axis::Eta => spec.axis_values.iter().map(|&v| Variant { eta: v, ..base }).collect(),
        _ => vec![base],
    }
}

/// Metric values of one trial, laid out `[variant][metric]`.
fn run_trial(ctx: &PointContext, spec: &SweepSpec, variants: &[Variant], trial: u64) -> Result<Vec<f64>> {
    let mut rng = RngStream::new(spec.seed, trial).rng();
    let real = draw_channels(&ctx.scene, &ctx.geom, &mut rng);
    let h = equivalent_channels(&real, &ctx.design, &ctx.geom)?;
    let needs_pilots = spec.estimator != Estimator::Genie || spec.metrics.iter().any(|m| m.needs_pilots());
    let (x_t, x_r) = if needs_pilots {
        let obs = simulate_pilot_rx_for(h, &ctx.scene, &ctx.pilots, &mut rng);
        (combine(&obs, &ctx.pilots.tau_t)?, combine(&obs, &ctx.pilots.tau_r)?)
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let lmmse = (ctx.lmmse[0].estimate(x_t), ctx.lmmse[1].estimate(x_r));
    let ls = (x_t / ctx.lmmse[0].pilot_gain, x_r / ctx.lmmse[1].pilot_gain);
    let (h_hat, err) = match spec.estimator {
        Estimator::Lmmse => (lmmse, (ctx.lmmse[0].err_variance, ctx.lmmse[1].err_variance)),
        Estimator::Ls => (ls, (ctx.ls_err[0], ctx.ls_err[1])),
        Estimator::Genie => (h, (0.0, 0.0)),
    };
    let nmse = |est: (Complex64, Complex64)| {
        0.5 * ((h.0 - est.0).norm_sqr() / ctx.lmmse[0].moments.variance
            + (h.1 - est.1).norm_sqr() / ctx.lmmse[1].moments.variance)
    };

    let mut out = Vec::with_capacity(variants.len() * spec.metrics.len());
    for v in variants {
        let mut inputs = RateInputs {
            h_hat_t: h_hat.0,
            h_hat_r: h_hat.1,
            err_variance_t: err.0,
            err_variance_r: err.1,
            rho_t: ctx.rho.0,
            rho_r: ctx.rho.1,
            hardware: ctx.scene.hardware,
            noise_power: ctx.scene.noise_power,
            eta: v.eta,
            beta: 0.0,
            fraction_b: v.fraction_b,
        };
        inputs.beta = match v.beta {
            BetaRule::Fixed(b) => b,
            BetaRule::Optimal => optimal_decoding_fraction(&inputs),
        };
        let noma = time_share(&noma_rates_imperfect(&inputs), inputs.beta);
        let oma = if spec.metrics.iter().any(|m| m.is_oma()) {
            oma_rates(&inputs)?
        } else {
            (0.0, 0.0, 0.0)
        };
        for m in &spec.metrics {
            out.push(match m {
                Metric::NmseLmmse => nmse(lmmse),
                Metric::NmseLs => nmse(ls),
                Metric::SumRateNoma => noma.2,
                Metric::RateTNoma => noma.0,
                Metric::RateRNoma => noma.1,
                Metric::SumRateOma => oma.2,
                Metric::RateTOma => oma.0,
                Metric::RateROma => oma.1,
            });
        }
    }
    Ok(out)
}

fn monte_carlo(ctx: &PointContext, spec: &SweepSpec, variants: &[Variant]) -> Result<Vec<Accumulator>> {
    let width = variants.len() * spec.metrics.len();
    let chunks: Vec<Result<Vec<Accumulator>>> = (0..spec.trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Accumulator::default(); width];
            for trial in c * CHUNK..((c + 1) * CHUNK).min(spec.trials) {
                for (a, x) in acc.iter_mut().zip(run_trial(ctx, spec, variants, trial as u64)?) {
                    a.push(x);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Accumulator::default(); width];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(&chunk?) {
            t.merge(c);
        }
    }
    Ok(total)
}

/// Closed-form counterpart of a metric, where one exists.
fn closed_form(ctx: &PointContext, spec: &SweepSpec, variant: &Variant, metric: Metric) -> Option<f64> {
    let [t, r] = &ctx.lmmse;
    match metric {
        Metric::NmseLmmse => Some(0.5 * (t.err_variance / t.moments.variance + r.err_variance / r.moments.variance)),
        Metric::NmseLs => Some(0.5 * (ctx.ls_err[0] / t.moments.variance + ctx.ls_err[1] / r.moments.variance)),
        Metric::SumRateNoma if variant.eta == 0.0 => match spec.estimator {
            Estimator::Lmmse => Some(sum_rate_bound(ctx, |s| (s.est_variance, s.err_variance))),
            Estimator::Genie => Some(sum_rate_bound(ctx, |s| (s.moments.variance, 0.0))),
            Estimator::Ls => None,
        },
        _ => None,
    }
}

/// Jensen bound on the ergodic sum rate given, per user, the variance of the
/// receiver's channel knowledge and its error variance.
fn sum_rate_bound(ctx: &PointContext, split: impl Fn(&LmmseStats) -> (f64, f64)) -> f64 {
    let mut signal = 0.0;
    let mut noise = ctx.scene.noise_power;
    for ((side, st), rho) in Side::BOTH.into_iter().zip(&ctx.lmmse).zip([ctx.rho.0, ctx.rho.1]) {
        let (known, err) = split(st);
        let power = st.moments.mean.norm_sqr() + known;
        let q = ctx.scene.hardware.undistorted(side);
        signal += rho * q * power;
        noise += rho * ((1.0 - q) * power + err);
    }
    (signal / noise).ln_1p() / std::f64::consts::LN_2
}

/// Runs every trial of every axis value. Output rows are ordered by axis
/// value, then by metric in `spec.metrics` order. Trial `i` always uses
/// stream `i` of `spec.seed`, so results are identical for any thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SeriesResult>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.axis_values.len() * spec.metrics.len());
    let mut emit = |ctx: &PointContext, axis_value: f64, v: &Variant, acc: &[Accumulator]| {
        for (m, a) in spec.metrics.iter().zip(acc) {
            rows.push(SeriesResult {
                axis_value,
                metric: *m,
                mc_mean: a.mean(),
                mc_stderr: a.stderr(),
                closed_form: closed_form(ctx, spec, v, *m),
            });
        }
    };
    let vars = variants(spec);
    if spec.axis.reshapes_channel() {
        for &value in &spec.axis_values {
            let ctx = point_context(spec, Some(value))?;
            let acc = monte_carlo(&ctx, spec, &vars)?;
            emit(&ctx, value, &vars[0], &acc);
        }
    } else {
        let ctx = point_context(spec, None)?;
        let acc = monte_carlo(&ctx, spec, &vars)?;
        let width = spec.metrics.len();
        for (i, (&value, v)) in spec.axis_values.iter().zip(&vars).enumerate() {
            emit(&ctx, value, v, &acc[i * width..(i + 1) * width]);
        }
    }
    if rows.iter().any(|r| !r.mc_mean.is_finite()) {
        return Err(Error::Internal(format!("sweep `{}` produced a non-finite mean", spec.name)));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(trials: usize) -> SweepSpec {
        let mut s = SweepSpec::new("smoke", Axis::SnrDb, vec![0.0, 10.0]);
        s.scene.set_elements(16);
        s.trials = trials;
        s.metrics = vec![Metric::NmseLmmse, Metric::NmseLs, Metric::SumRateNoma];
        s
    }

    #[test]
    fn deterministic() {
        let s = smoke(100);
        assert_eq!(run_sweep(&s).unwrap(), run_sweep(&s).unwrap());
        let one = smoke(1);
        let a = run_sweep(&one).unwrap();
        assert_eq!(a, run_sweep(&one).unwrap());
        assert!(a.iter().all(|r| r.mc_stderr == 0.0));
    }

    #[test]
    fn stderr_halves_with_four_times_trials() {
        let a = run_sweep(&smoke(500)).unwrap();
        let b = run_sweep(&smoke(2000)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let ratio = x.mc_stderr / y.mc_stderr;
            assert!((ratio - 2.0).abs() < 0.4, "{:?}: {ratio}", x.metric);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = smoke(10);
        s.axis_values = vec![1.0, 1.0];
        assert!(run_sweep(&s).is_err());
        let mut s = smoke(10);
        s.trials = 0;
        assert!(run_sweep(&s).is_err());
        let mut s = smoke(10);
        s.axis = Axis::Fraction;
        s.axis_values = vec![0.0, 0.5];
        assert!(run_sweep(&s).is_err());
        let mut s = smoke(10);
        s.axis = Axis::PilotLen;
        s.axis_values = vec![1.0, 4.0];
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn fraction_axis_reuses_trials() {
        let mut s = smoke(200);
        s.axis = Axis::Fraction;
        s.axis_values = vec![0.25, 0.5, 0.75];
        s.metrics = vec![Metric::SumRateNoma, Metric::RateTNoma];
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 6);
        let sums: Vec<f64> = rows.iter().filter(|r| r.metric == Metric::SumRateNoma).map(|r| r.mc_mean).collect();
        assert!(sums.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));
    }

    #[test]
    fn snr_solves_power() {
        let scene = SceneConfig::default();
        let g = derive_geometry(&scene).unwrap();
        let (t, r) = powers_for_snr(&g, &scene, 10.0, -10.0);
        assert!((t * g.cascade_gain(Side::Transmit) / scene.noise_power - 10.0).abs() < 1e-12);
        assert!((r * g.cascade_gain(Side::Reflect) / scene.noise_power - 0.1).abs() < 1e-14);
    }
}
