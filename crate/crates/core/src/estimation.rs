//! Pilot transmission with transceiver impairments, pilot combining, and the
//! LMMSE / LS estimators of the two equivalent channels.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::PhaseDesign;
use crate::channel::{equivalent_channels, ChannelRealization};
use crate::error::{invalid, Error, Result};
use crate::geometry::LinkGeometry;
use crate::noise::cscg;
use crate::scene::{SceneConfig, Side};
use crate::statistics::{channel_moments, ChannelMoments};

/// Pilot length and per-user pilot powers in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub len: usize,
    pub power_t: f64,
    pub power_r: f64,
}

impl PilotConfig {
    pub fn new(len: usize, power_t: f64, power_r: f64) -> Result<Self> {
        let cfg = Self {
            len,
            power_t,
            power_r,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < 2 {
            return Err(invalid("pilot_len_K", format!("must be >= 2, got {}", self.len)));
        }
        for (name, p) in [("power_t", self.power_t), ("power_r", self.power_r)] {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(invalid(name, format!("must be finite and >= 0, got {p}")));
            }
        }
        Ok(())
    }

    pub fn power(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.power_t,
            Side::Reflect => self.power_r,
        }
    }
}

/// Rows 1 and 2 of the `K`-point DFT matrix: `τ_t[k] = 1`,
/// `τ_r[k] = e^{−j2πk/K}`.
pub fn pilot_sequences(len: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if len < 2 {
        return Err(invalid("pilot_len_K", format!("must be >= 2, got {len}")));
    }
    let t = vec![Complex64::new(1.0, 0.0); len];
    let r = (0..len)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / len as f64))
        .collect();
    Ok((t, r))
}

/// Pilot sequences bundled with their configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Pilots {
    pub config: PilotConfig,
    pub tau_t: Vec<Complex64>,
    pub tau_r: Vec<Complex64>,
}

impl Pilots {
    pub fn new(config: PilotConfig) -> Result<Self> {
        config.validate()?;
        let (tau_t, tau_r) = pilot_sequences(config.len)?;
        Ok(Self {
            config,
            tau_t,
            tau_r,
        })
    }

    pub fn sequence(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Transmit => &self.tau_t,
            Side::Reflect => &self.tau_r,
        }
    }
}

/// Received pilot block for known channels `h_t`, `h_r`. Each observation is
/// the clean superposition plus AP-side distortion, UE-side distortion and
/// receiver noise, all drawn afresh per symbol.
pub fn simulate_pilot_rx_for<R: Rng + ?Sized>(
    h: (Complex64, Complex64),
    scene: &SceneConfig,
    pilots: &Pilots,
    rng: &mut R,
) -> Vec<Complex64> {
    let hw = scene.hardware;
    let users = [(Side::Transmit, h.0), (Side::Reflect, h.1)].map(|(side, h)| {
        let p = pilots.config.power(side);
        let eps_u = hw.eps_u(side);
        (
            side,
            (p * hw.eps_v * eps_u).sqrt() * h,
            (p * (1.0 - hw.eps_v)).sqrt() * h,
            (p * hw.eps_v * (1.0 - eps_u)).sqrt() * h,
        )
    });
    (0..pilots.config.len)
        .map(|k| {
            let mut x = Complex64::new(0.0, 0.0);
            for &(side, clean, ap, ue) in &users {
                x += clean * pilots.sequence(side)[k];
                x += ap * cscg(1.0, rng);
                x += ue * cscg(1.0, rng);
            }
            x + cscg(scene.noise_power, rng)
        })
        .collect()
}

pub fn simulate_pilot_rx<R: Rng + ?Sized>(
    real: &ChannelRealization,
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &Pilots,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let h = equivalent_channels(real, design, geom)?;
    Ok(simulate_pilot_rx_for(h, scene, pilots, rng))
}

/// `(1/√K) Σ_k x^{(k)} τ^{(k)*}`.
pub fn combine(observations: &[Complex64], pilot: &[Complex64]) -> Result<Complex64> {
    if observations.len() != pilot.len() {
        return Err(Error::LengthMismatch {
            expected: pilot.len(),
            actual: observations.len(),
        });
    }
    if pilot.is_empty() {
        return Err(invalid("pilot_len_K", "empty pilot"));
    }
    let sum: Complex64 = observations.iter().zip(pilot).map(|(x, t)| x * t.conj()).sum();
    Ok(sum / (pilot.len() as f64).sqrt())
}

/// Everything the LMMSE estimator of one user needs, fixed for a given design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmmseStats {
    pub moments: ChannelMoments,
    /// `√(K P_i ε_v ε_{u_i})`, the pilot gain seen after combining.
    pub pilot_gain: f64,
    /// Distortion power `ζ` common to both users.
    pub zeta: f64,
    pub c_hx: f64,
    pub c_xx: f64,
    pub est_variance: f64,
    pub err_variance: f64,
}

impl LmmseStats {
    pub fn expected_x(&self) -> Complex64 {
        self.pilot_gain * self.moments.mean
    }

    pub fn estimate(&self, combined: Complex64) -> Complex64 {
        self.moments.mean + (self.c_hx / self.c_xx) * (combined - self.expected_x())
    }
}

/// `ζ = Σ_i P_i (1 − ε_v ε_{u_i}) E|h_i|²`.
pub fn distortion_power(moments: &[ChannelMoments; 2], scene: &SceneConfig, pilots: &PilotConfig) -> f64 {
    Side::BOTH
        .iter()
        .zip(moments)
        .map(|(&side, m)| {
            pilots.power(side) * (1.0 - scene.hardware.undistorted(side)) * m.second_moment
        })
        .sum()
}

fn both_moments(design: &PhaseDesign, geom: &LinkGeometry, scene: &SceneConfig) -> [ChannelMoments; 2] {
    Side::BOTH.map(|side| channel_moments(design, geom, scene, side))
}

/// LMMSE statistics of both users.
pub fn lmmse_stats(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &PilotConfig,
) -> Result<[LmmseStats; 2]> {
    pilots.validate()?;
    let moments = both_moments(design, geom, scene);
    let zeta = distortion_power(&moments, scene, pilots);
    let mut out = Vec::with_capacity(2);
    for (side, m) in Side::BOTH.into_iter().zip(moments) {
        let s = (pilots.len as f64 * pilots.power(side) * scene.hardware.undistorted(side)).sqrt();
        let c_hh = m.variance;
        let c_hx = s * c_hh;
        let c_xx = s * s * c_hh + zeta + scene.noise_power;
        if !(c_xx > 0.0) {
            return Err(Error::Internal(format!(
                "observation variance is not positive ({c_xx}) for side {}",
                side.label()
            )));
        }
        out.push(LmmseStats {
            moments: m,
            pilot_gain: s,
            zeta,
            c_hx,
            c_xx,
            est_variance: c_hx * c_hx / c_xx,
            err_variance: c_hh * (zeta + scene.noise_power) / c_xx,
        });
    }
    Ok([out[0], out[1]])
}

/// `(ĥ_i, C_ĥĥ, C_ȟȟ)` for one user from its combined observation.
pub fn lmmse_estimate(
    combined: Complex64,
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &PilotConfig,
    side: Side,
) -> Result<(Complex64, f64, f64)> {
    let stats = lmmse_stats(design, geom, scene, pilots)?;
    let st = &stats[side as usize];
    Ok((st.estimate(combined), st.est_variance, st.err_variance))
}

fn ls_gain(pilots: &PilotConfig, scene: &SceneConfig, side: Side) -> Result<f64> {
    let g = (pilots.len as f64 * pilots.power(side) * scene.hardware.undistorted(side)).sqrt();
    if !(g > 0.0) {
        return Err(Error::Domain(format!(
            "least squares needs a positive pilot gain for side {}",
            side.label()
        )));
    }
    Ok(g)
}

/// `x_i / √(K P_i ε_v ε_{u_i})`.
pub fn ls_estimate(combined: Complex64, pilots: &PilotConfig, scene: &SceneConfig, side: Side) -> Result<Complex64> {
    Ok(combined / ls_gain(pilots, scene, side)?)
}

/// Mean error power of the LS estimate, `(ζ + σ_w²) / (K P_i ε_v ε_{u_i})`.
pub fn ls_error_variance(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &PilotConfig,
    side: Side,
) -> Result<f64> {
    let zeta = distortion_power(&both_moments(design, geom, scene), scene, pilots);
    let g = ls_gain(pilots, scene, side)?;
    Ok((zeta + scene.noise_power) / (g * g))
}

/// Estimates of both users with their closed-form variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationOutcome {
    pub h_hat_t: Complex64,
    pub h_hat_r: Complex64,
    pub est_variance_t: f64,
    pub est_variance_r: f64,
    pub err_variance_t: f64,
    pub err_variance_r: f64,
    pub nmse_closed: f64,
}

impl EstimationOutcome {
    pub fn from_stats(stats: &[LmmseStats; 2], x_t: Complex64, x_r: Complex64) -> Self {
        let [t, r] = stats;
        Self {
            h_hat_t: t.estimate(x_t),
            h_hat_r: r.estimate(x_r),
            est_variance_t: t.est_variance,
            est_variance_r: r.est_variance,
            err_variance_t: t.err_variance,
            err_variance_r: r.err_variance,
            nmse_closed: nmse_from_stats(stats),
        }
    }

    pub fn h_hat(&self, side: Side) -> Complex64 {
        match side {
            Side::Transmit => self.h_hat_t,
            Side::Reflect => self.h_hat_r,
        }
    }

    pub fn err_variance(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.err_variance_t,
            Side::Reflect => self.err_variance_r,
        }
    }
}

fn nmse_from_stats(stats: &[LmmseStats; 2]) -> f64 {
    0.5 * stats
        .iter()
        .map(|s| s.err_variance / s.moments.variance)
        .sum::<f64>()
}

/// `½ Σ_i C_ȟȟ,i / C_hh,i` for the LMMSE estimator.
pub fn nmse_closed_form(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &PilotConfig,
) -> Result<f64> {
    Ok(nmse_from_stats(&lmmse_stats(design, geom, scene, pilots)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorVariant {
    /// Limit of the N-MSE as both pilot powers grow together.
    Exact,
    /// The same limit further simplified for long pilots.
    LargeK,
}

/// High-power N-MSE floor. `ζ'` is the distortion power per unit pilot power,
/// which is what the limit converges to when `P_t = P_r`.
pub fn nmse_floor(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &PilotConfig,
    variant: FloorVariant,
) -> Result<f64> {
    let unit = PilotConfig::new(pilots.len, 1.0, 1.0)?;
    let moments = both_moments(design, geom, scene);
    let zeta1 = distortion_power(&moments, scene, &unit);
    let k = pilots.len as f64;
    let terms = Side::BOTH.iter().zip(&moments).map(|(&side, m)| {
        let signal = k * scene.hardware.undistorted(side) * m.variance;
        match variant {
            FloorVariant::Exact => zeta1 / (signal + zeta1),
            FloorVariant::LargeK => zeta1 / signal,
        }
    });
    Ok(0.5 * terms.sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::optimal_phases;
    use crate::channel::draw_channels;
    use crate::geometry::derive_geometry;
    use crate::noise::RngStream;
    use crate::scene::HardwareQuality;

    fn setup(eps: f64) -> (SceneConfig, LinkGeometry, PhaseDesign) {
        let mut s = SceneConfig::default();
        s.hardware = HardwareQuality::uniform(eps);
        let g = derive_geometry(&s).unwrap();
        let d = optimal_phases(&g, &s);
        (s, g, d)
    }

    /// Transmit power giving average SNR `γ` on the UE-T link.
    fn power_for_snr(s: &SceneConfig, g: &LinkGeometry, snr_db: f64) -> f64 {
        10f64.powf(snr_db / 10.0) * s.noise_power / g.cascade_gain(Side::Transmit)
    }

    #[test]
    fn dft_pilots() {
        let (t, r) = pilot_sequences(2).unwrap();
        assert_eq!(t, vec![Complex64::new(1.0, 0.0); 2]);
        assert!((r[1] + 1.0).norm() < 1e-15);
        assert!(pilot_sequences(1).is_err());
        for k in 2..=64 {
            let (t, r) = pilot_sequences(k).unwrap();
            let cross: Complex64 = r.iter().zip(&t).map(|(a, b)| a * b.conj()).sum();
            let auto: Complex64 = r.iter().map(|a| a * a.conj()).sum();
            assert!(cross.norm() < 1e-12);
            assert!((auto - k as f64).norm() < 1e-12);
        }
    }

    #[test]
    fn ideal_noiseless_pilots_recover_channels() {
        let (mut s, g, d) = setup(1.0);
        s.noise_power = 0.0;
        let pilots = Pilots::new(PilotConfig::new(4, 2.0, 3.0).unwrap()).unwrap();
        let h = (Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.4));
        let x = simulate_pilot_rx_for(h, &s, &pilots, &mut RngStream::new(1, 0).rng());
        for k in 0..4 {
            let expect = 2f64.sqrt() * h.0 * pilots.tau_t[k] + 3f64.sqrt() * h.1 * pilots.tau_r[k];
            assert!((x[k] - expect).norm() < 1e-14);
        }
        let xt = combine(&x, &pilots.tau_t).unwrap();
        let ls = ls_estimate(xt, &pilots.config, &s, Side::Transmit).unwrap();
        assert!((ls - h.0).norm() < 1e-14);
        let _ = (g, d);
    }

    #[test]
    fn combine_hand_instance() {
        let x = [Complex64::new(1.0, 2.0), Complex64::new(3.0, -1.0)];
        let tau = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let got = combine(&x, &tau).unwrap();
        let expect = (x[0] + x[1] * Complex64::new(0.0, -1.0)) / 2f64.sqrt();
        assert!((got - expect).norm() < 1e-15);
        assert!(combine(&x, &tau[..1]).is_err());
        assert_eq!(combine(&x[..1], &tau[..1]).unwrap(), x[0]);
    }

    #[test]
    fn variance_decomposition() {
        for eps in [1.0, 0.99, 0.9] {
            let (s, g, d) = setup(eps);
            for snr in [-10.0, 0.0, 20.0] {
                let p = power_for_snr(&s, &g, snr);
                for k in [2, 50] {
                    let stats = lmmse_stats(&d, &g, &s, &PilotConfig::new(k, p, p).unwrap()).unwrap();
                    for st in stats {
                        let sum = st.est_variance + st.err_variance;
                        assert!((sum / st.moments.variance - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn err_variance_independent_formula() {
        let (s, g, d) = setup(0.95);
        let p = power_for_snr(&s, &g, 0.0);
        let pilots = PilotConfig::new(50, p, p).unwrap();
        let stats = lmmse_stats(&d, &g, &s, &pilots).unwrap();
        // Direct evaluation with κ = 1 everywhere, ξ = 1, coherent sum = N.
        let n = 400.0;
        let c_hh = |side: Side| g.cascade_gain(side) * 3.0 * n / 4.0;
        let second = |side: Side| g.cascade_gain(side) * (n * n + 3.0 * n) / 4.0;
        let zeta = p * (1.0 - 0.95 * 0.95) * (second(Side::Transmit) + second(Side::Reflect));
        let expect = c_hh(Side::Transmit) * (zeta + s.noise_power)
            / (50.0 * p * 0.95 * 0.95 * c_hh(Side::Transmit) + zeta + s.noise_power);
        assert!((stats[0].err_variance / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_clean_pilots_nearly_perfect() {
        let (mut s, g, d) = setup(1.0);
        s.noise_power = 1e-30;
        let p = 1.0;
        let stats = lmmse_stats(&d, &g, &s, &PilotConfig::new(512, p, p).unwrap()).unwrap();
        assert!(stats[0].err_variance < 1e-3 * stats[0].moments.variance);
        let nmse = nmse_closed_form(&d, &g, &s, &PilotConfig::new(2, 1e15, 1e15).unwrap()).unwrap();
        assert!(nmse < 1e-6);
    }

    #[test]
    fn floors() {
        let (s, g, d) = setup(1.0);
        let pilots = PilotConfig::new(2, 1.0, 1.0).unwrap();
        assert_eq!(nmse_floor(&d, &g, &s, &pilots, FloorVariant::Exact).unwrap(), 0.0);

        let (s, g, d) = setup(0.99);
        let p = power_for_snr(&s, &g, 60.0);
        let pilots = PilotConfig::new(2, p, p).unwrap();
        let floor = nmse_floor(&d, &g, &s, &pilots, FloorVariant::Exact).unwrap();
        let nmse = nmse_closed_form(&d, &g, &s, &pilots).unwrap();
        assert!((nmse / floor - 1.0).abs() < 5e-3, "{nmse} vs {floor}");

        let long = PilotConfig::new(10_000, p, p).unwrap();
        let exact = nmse_floor(&d, &g, &s, &long, FloorVariant::Exact).unwrap();
        let large = nmse_floor(&d, &g, &s, &long, FloorVariant::LargeK).unwrap();
        assert!((large / exact - 1.0).abs() < 0.01);
    }

    #[test]
    fn pilot_variance_matches_term_sum() {
        let (s, _, _) = setup(0.8);
        let pilots = Pilots::new(PilotConfig::new(3, 2.0, 0.5).unwrap()).unwrap();
        let h = (Complex64::new(1e-6, 2e-6), Complex64::new(-3e-6, 0.5e-6));
        let mut rng = RngStream::new(9, 0).rng();
        let n = 100_000;
        let clean = 2f64.sqrt() * 0.8 * h.0 * pilots.tau_t[1] + 0.5f64.sqrt() * 0.8 * h.1 * pilots.tau_r[1];
        let mut power = 0.0;
        for _ in 0..n {
            let x = simulate_pilot_rx_for(h, &s, &pilots, &mut rng);
            power += (x[1] - clean).norm_sqr();
        }
        power /= n as f64;
        let expect = (1.0 - 0.64) * (2.0 * h.0.norm_sqr() + 0.5 * h.1.norm_sqr()) + s.noise_power;
        assert!((power / expect - 1.0).abs() < 0.02, "{power} vs {expect}");
    }

    #[test]
    fn lmmse_mc_error_power() {
        let (s, g, d) = setup(0.95);
        let p = power_for_snr(&s, &g, 0.0);
        let pilots = Pilots::new(PilotConfig::new(10, p, p).unwrap()).unwrap();
        let stats = lmmse_stats(&d, &g, &s, &pilots.config).unwrap();
        let mut rng = RngStream::new(10, 0).rng();
        let n = 20_000;
        let mut errs = Vec::with_capacity(n);
        for _ in 0..n {
            let real = draw_channels(&s, &g, &mut rng);
            let h = equivalent_channels(&real, &d, &g).unwrap();
            let x = simulate_pilot_rx_for(h, &s, &pilots, &mut rng);
            let xt = combine(&x, &pilots.tau_t).unwrap();
            errs.push((h.0 - stats[0].estimate(xt)).norm_sqr());
        }
        let mean = errs.iter().sum::<f64>() / n as f64;
        let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - stats[0].err_variance).abs() < 4.0 * se, "{mean} vs {} (se {se})", stats[0].err_variance);
    }
}
