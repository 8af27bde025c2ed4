//! Flat `key = value` configuration files.

use std::fs;
use std::path::Path;

use starnoma_core::experiments::{Axis, BetaRule, DesignKind, Estimator, Metric, SweepSpec};
use starnoma_core::{PhaseNoiseKind, PhaseNoiseModel, SceneConfig, SicMode};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: malformed value for `{key}`: {reason}")]
    Malformed { line: usize, key: String, reason: String },
    #[error("line {line}: `{key}` out of range: {reason}")]
    OutOfRange { line: usize, key: String, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
}

/// One parsed assignment, already converted to linear units.
#[derive(Debug, Clone, PartialEq)]
enum Setting {
    Position(PositionKey, [f64; 3]),
    PanelDim(PanelKey, usize),
    Elements(usize),
    SpacingOverLambda(f64),
    Wavelength(f64),
    Kappa(KappaKey, f64),
    Alpha(KappaKey, f64),
    Rho0(f64),
    NoisePower(f64),
    Eps(EpsKey, f64),
    NoiseKind(PhaseNoiseKind),
    NoisePowerPhase(f64),
    PilotLen(usize),
    Eta(f64),
    Beta(BetaRule),
    FractionB(f64),
    Name(String),
    Axis(Axis),
    AxisValues(Vec<f64>),
    Metrics(Vec<Metric>),
    Estimator(Estimator),
    Design(DesignKind),
    Snr(Option<f64>, Option<f64>),
    Trials(usize),
    Seed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PositionKey {
    Ap,
    Uet,
    Uer,
    Ris,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PanelKey {
    Tx,
    Ty,
    Rx,
    Ry,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum KappaKey {
    T,
    R,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EpsKey {
    All,
    V,
    Ut,
    Ur,
}

/// Parsed configuration. Keys not present in the file leave the target
/// untouched, so the same file can adjust a preset or define a sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    settings: Vec<Setting>,
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut settings = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = key.trim();
        let value = value.trim();
        let canonical = canonical_key(key);
        if seen.iter().any(|k| k == canonical) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        seen.push(canonical.to_string());
        settings.push(parse_setting(line, key, value)?);
    }
    Ok(Config { settings })
}

fn canonical_key(key: &str) -> &str {
    match key {
        "epsilon_v" => "eps_v",
        "epsilon_ut" => "eps_ut",
        "epsilon_ur" => "eps_ur",
        other => other,
    }
}

struct Ctx<'a> {
    line: usize,
    key: &'a str,
}

impl Ctx<'_> {
    fn malformed(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::Malformed {
            line: self.line,
            key: self.key.to_string(),
            reason: reason.into(),
        }
    }

    fn range(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::OutOfRange {
            line: self.line,
            key: self.key.to_string(),
            reason: reason.into(),
        }
    }

    fn float(&self, v: &str) -> Result<f64, ConfigError> {
        let x: f64 = v.parse().map_err(|_| self.malformed(format!("`{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(self.range("must be finite"));
        }
        Ok(x)
    }

    fn positive(&self, v: &str) -> Result<f64, ConfigError> {
        let x = self.float(v)?;
        if x <= 0.0 {
            return Err(self.range(format!("must be > 0, got {x}")));
        }
        Ok(x)
    }

    fn non_negative(&self, v: &str) -> Result<f64, ConfigError> {
        let x = self.float(v)?;
        if x < 0.0 {
            return Err(self.range(format!("must be >= 0, got {x}")));
        }
        Ok(x)
    }

    fn unit(&self, v: &str) -> Result<f64, ConfigError> {
        let x = self.float(v)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(self.range(format!("must lie in [0, 1], got {x}")));
        }
        Ok(x)
    }

    fn count(&self, v: &str, min: usize) -> Result<usize, ConfigError> {
        let n: usize = v
            .parse()
            .map_err(|_| self.malformed(format!("`{v}` is not a non-negative integer")))?;
        if n < min {
            return Err(self.range(format!("must be >= {min}, got {n}")));
        }
        Ok(n)
    }

    fn list(&self, v: &str) -> Result<Vec<f64>, ConfigError> {
        v.split(',').map(|s| self.float(s.trim())).collect()
    }

    fn position(&self, v: &str) -> Result<[f64; 3], ConfigError> {
        let xs = self.list(v)?;
        xs.try_into()
            .map_err(|xs: Vec<f64>| self.malformed(format!("expected 3 coordinates, got {}", xs.len())))
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn parse_axis(ctx: &Ctx, v: &str) -> Result<Axis, ConfigError> {
    Ok(match v {
        "snr_db" => Axis::SnrDb,
        "n_elements" => Axis::NElements,
        "pilot_len_K" => Axis::PilotLen,
        "fraction" | "fraction_B_or_beta" => Axis::Fraction,
        "eta" => Axis::Eta,
        _ => {
            return Err(ctx.malformed(format!(
                "unknown axis `{v}` (snr_db, n_elements, pilot_len_K, fraction, eta)"
            )))
        }
    })
}

fn parse_metric(ctx: &Ctx, v: &str) -> Result<Metric, ConfigError> {
    const ALL: [Metric; 8] = [
        Metric::NmseLmmse,
        Metric::NmseLs,
        Metric::SumRateNoma,
        Metric::RateTNoma,
        Metric::RateRNoma,
        Metric::SumRateOma,
        Metric::RateTOma,
        Metric::RateROma,
    ];
    ALL.into_iter()
        .find(|m| m.name() == v)
        .ok_or_else(|| ctx.malformed(format!("unknown metric `{v}`")))
}

fn parse_setting(line: usize, key: &str, v: &str) -> Result<Setting, ConfigError> {
    let ctx = Ctx { line, key };
    use Setting as S;
    Ok(match key {
        "ap_pos" => S::Position(PositionKey::Ap, ctx.position(v)?),
        "uet_pos" => S::Position(PositionKey::Uet, ctx.position(v)?),
        "uer_pos" => S::Position(PositionKey::Uer, ctx.position(v)?),
        "ris_pos" => S::Position(PositionKey::Ris, ctx.position(v)?),
        "n_t_x" => S::PanelDim(PanelKey::Tx, ctx.count(v, 1)?),
        "n_t_y" => S::PanelDim(PanelKey::Ty, ctx.count(v, 1)?),
        "n_r_x" => S::PanelDim(PanelKey::Rx, ctx.count(v, 1)?),
        "n_r_y" => S::PanelDim(PanelKey::Ry, ctx.count(v, 1)?),
        "n_elements" => S::Elements(ctx.count(v, 1)?),
        "spacing_over_lambda" => S::SpacingOverLambda(ctx.positive(v)?),
        "wavelength_m" => S::Wavelength(ctx.positive(v)?),
        "kappa_t_db" => S::Kappa(KappaKey::T, db_to_linear(ctx.float(v)?)),
        "kappa_r_db" => S::Kappa(KappaKey::R, db_to_linear(ctx.float(v)?)),
        "kappa_a_db" => S::Kappa(KappaKey::A, db_to_linear(ctx.float(v)?)),
        "alpha_t" => S::Alpha(KappaKey::T, ctx.positive(v)?),
        "alpha_r" => S::Alpha(KappaKey::R, ctx.positive(v)?),
        "alpha_a" => S::Alpha(KappaKey::A, ctx.positive(v)?),
        "rho0_db" => S::Rho0(db_to_linear(ctx.float(v)?)),
        "noise_dbm" => S::NoisePower(db_to_linear(ctx.float(v)? - 30.0)),
        "eps" => S::Eps(EpsKey::All, ctx.unit(v)?),
        "eps_v" | "epsilon_v" => S::Eps(EpsKey::V, ctx.unit(v)?),
        "eps_ut" | "epsilon_ut" => S::Eps(EpsKey::Ut, ctx.unit(v)?),
        "eps_ur" | "epsilon_ur" => S::Eps(EpsKey::Ur, ctx.unit(v)?),
        "phase_noise_kind" => S::NoiseKind(match v {
            "none" => PhaseNoiseKind::None,
            "vonmises" => PhaseNoiseKind::VonMises,
            "uniform" => PhaseNoiseKind::Uniform,
            _ => return Err(ctx.malformed(format!("`{v}` is not one of none, vonmises, uniform"))),
        }),
        "phase_noise_power" => S::NoisePowerPhase(ctx.non_negative(v)?),
        "pilot_len_K" => S::PilotLen(ctx.count(v, 2)?),
        "eta" => S::Eta(ctx.unit(v)?),
        "beta" => S::Beta(match v {
            "optimal" => BetaRule::Optimal,
            _ => BetaRule::Fixed(ctx.unit(v)?),
        }),
        "fraction_B" => {
            let b = ctx.float(v)?;
            if !(b > 0.0 && b < 1.0) {
                return Err(ctx.range(format!("must lie in (0, 1), got {b}")));
            }
            S::FractionB(b)
        }
        "name" => {
            if v.is_empty() || v.contains(['/', '\\']) {
                return Err(ctx.malformed("must be a non-empty file stem"));
            }
            S::Name(v.to_string())
        }
        "axis" => S::Axis(parse_axis(&ctx, v)?),
        "axis_values" => S::AxisValues(ctx.list(v)?),
        "metrics" => S::Metrics(v.split(',').map(|m| parse_metric(&ctx, m.trim())).collect::<Result<_, _>>()?),
        "estimator" => S::Estimator(match v {
            "lmmse" => Estimator::Lmmse,
            "ls" => Estimator::Ls,
            "genie" => Estimator::Genie,
            _ => return Err(ctx.malformed(format!("`{v}` is not one of lmmse, ls, genie"))),
        }),
        "phase_design" => S::Design(match v {
            "optimal" => DesignKind::Optimal,
            "random" => DesignKind::Random,
            _ => return Err(ctx.malformed(format!("`{v}` is not one of optimal, random"))),
        }),
        "snr_db" => {
            let x = ctx.float(v)?;
            S::Snr(Some(x), Some(x))
        }
        "snr_t_db" => S::Snr(Some(ctx.float(v)?), None),
        "snr_r_db" => S::Snr(None, Some(ctx.float(v)?)),
        "trials" => S::Trials(ctx.count(v, 1)?),
        "seed" => S::Seed(v.parse().map_err(|_| ctx.malformed(format!("`{v}` is not a 64-bit unsigned integer")))?),
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    })
}

impl Config {
    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    /// Whether the file defines its own sweep rather than adjusting a preset.
    pub fn defines_sweep(&self) -> bool {
        self.settings.iter().any(|s| matches!(s, Setting::Axis(_)))
    }

    /// The reference scene with this file's scene keys applied.
    pub fn scene(&self) -> SceneConfig {
        let mut scene = SceneConfig::default();
        self.apply_scene(&mut scene);
        scene
    }

    fn apply_scene(&self, scene: &mut SceneConfig) {
        let ratio_x = scene.spacing_x / scene.wavelength;
        let ratio_y = scene.spacing_y / scene.wavelength;
        let mut ratio = None;
        let mut noise_kind = None;
        let mut noise_power = None;
        for s in &self.settings {
            match *s {
                Setting::Position(k, p) => match k {
                    PositionKey::Ap => scene.ap_pos = p,
                    PositionKey::Uet => scene.uet_pos = p,
                    PositionKey::Uer => scene.uer_pos = p,
                    PositionKey::Ris => scene.ris_pos = p,
                },
                Setting::Elements(n) => scene.set_elements(n),
                Setting::SpacingOverLambda(r) => ratio = Some(r),
                Setting::Wavelength(l) => scene.wavelength = l,
                Setting::Kappa(k, x) => *match k {
                    KappaKey::T => &mut scene.kappa_t,
                    KappaKey::R => &mut scene.kappa_r,
                    KappaKey::A => &mut scene.kappa_a,
                } = x,
                Setting::Alpha(k, x) => *match k {
                    KappaKey::T => &mut scene.alpha_t,
                    KappaKey::R => &mut scene.alpha_r,
                    KappaKey::A => &mut scene.alpha_a,
                } = x,
                Setting::Rho0(x) => scene.rho0 = x,
                Setting::NoisePower(x) => scene.noise_power = x,
                Setting::Eps(EpsKey::All, x) => scene.hardware = starnoma_core::HardwareQuality::uniform(x),
                Setting::NoiseKind(k) => noise_kind = Some(k),
                Setting::NoisePowerPhase(p) => noise_power = Some(p),
                _ => {}
            }
        }
        // Per-dimension and per-factor keys refine the aggregate ones.
        for s in &self.settings {
            match *s {
                Setting::PanelDim(k, n) => match k {
                    PanelKey::Tx => scene.panel_t.nx = n,
                    PanelKey::Ty => scene.panel_t.ny = n,
                    PanelKey::Rx => scene.panel_r.nx = n,
                    PanelKey::Ry => scene.panel_r.ny = n,
                },
                Setting::Eps(k, x) => match k {
                    EpsKey::V => scene.hardware.eps_v = x,
                    EpsKey::Ut => scene.hardware.eps_ut = x,
                    EpsKey::Ur => scene.hardware.eps_ur = x,
                    EpsKey::All => {}
                },
                _ => {}
            }
        }
        scene.spacing_x = ratio.unwrap_or(ratio_x) * scene.wavelength;
        scene.spacing_y = ratio.unwrap_or(ratio_y) * scene.wavelength;
        if noise_kind.is_some() || noise_power.is_some() {
            let kind = noise_kind.unwrap_or(scene.phase_noise.kind());
            let power = noise_power.unwrap_or(match scene.phase_noise.power() {
                p if p > 0.0 => p,
                _ => 0.1,
            });
            scene.phase_noise = PhaseNoiseModel::new(kind, power).expect("power checked at parse time");
        }
    }

    /// Applies every key of the file onto `spec`.
    pub fn apply(&self, spec: &mut SweepSpec) {
        self.apply_scene(&mut spec.scene);
        for s in &self.settings {
            match s {
                Setting::PilotLen(k) => spec.pilot_len = *k,
                Setting::Eta(e) => {
                    spec.sic = if *e == 0.0 {
                        SicMode::Perfect
                    } else {
                        SicMode::Imperfect { eta: *e }
                    }
                }
                Setting::Beta(b) => spec.beta = *b,
                Setting::FractionB(b) => spec.fraction_b = *b,
                Setting::Name(n) => spec.name = n.clone(),
                Setting::Axis(a) => spec.axis = *a,
                Setting::AxisValues(v) => spec.axis_values = v.clone(),
                Setting::Metrics(m) => spec.metrics = m.clone(),
                Setting::Estimator(e) => spec.estimator = *e,
                Setting::Design(d) => spec.phase_design = *d,
                Setting::Snr(t, r) => {
                    if let Some(t) = t {
                        spec.snr_t_db = *t;
                    }
                    if let Some(r) = r {
                        spec.snr_r_db = *r;
                    }
                }
                Setting::Trials(n) => spec.trials = *n,
                Setting::Seed(s) => spec.seed = *s,
                _ => {}
            }
        }
    }

    /// A standalone sweep from a file that sets `axis`.
    pub fn sweep(&self) -> SweepSpec {
        let mut spec = SweepSpec::new("custom", Axis::SnrDb, Vec::new());
        self.apply(&mut spec);
        spec
    }

    /// Pilot length, when the file sets one.
    pub fn pilot_len(&self) -> Option<usize> {
        self.settings.iter().find_map(|s| match s {
            Setting::PilotLen(k) => Some(*k),
            _ => None,
        })
    }
}
