//! Random sources: RIS phase noise, circularly symmetric complex Gaussians,
//! and the `ξ = E[e^{jθ̃}]` attenuation factor of the phase noise.

mod bessel;
mod rng;

pub use bessel::{bessel_i_ratio, SERIES_LIMIT};
pub use rng::{RngStream, SimRng};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseNoiseKind {
    None,
    VonMises,
    Uniform,
}

/// Distribution of the per-element RIS phase error `θ̃`, parameterised by its
/// power `σ_p²`. Zero power is always normalised to [`PhaseNoiseKind::None`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoiseModel {
    kind: PhaseNoiseKind,
    power: f64,
}

impl Default for PhaseNoiseModel {
    fn default() -> Self {
        Self::none()
    }
}

impl PhaseNoiseModel {
    pub fn new(kind: PhaseNoiseKind, power: f64) -> Result<Self> {
        if !power.is_finite() || power < 0.0 {
            return Err(invalid(
                "phase_noise_power",
                format!("must be finite and >= 0, got {power}"),
            ));
        }
        if kind == PhaseNoiseKind::None || power == 0.0 {
            return Ok(Self::none());
        }
        Ok(Self { kind, power })
    }

    pub fn none() -> Self {
        Self {
            kind: PhaseNoiseKind::None,
            power: 0.0,
        }
    }

    pub fn von_mises(power: f64) -> Result<Self> {
        Self::new(PhaseNoiseKind::VonMises, power)
    }

    pub fn uniform(power: f64) -> Result<Self> {
        Self::new(PhaseNoiseKind::Uniform, power)
    }

    pub fn kind(&self) -> PhaseNoiseKind {
        self.kind
    }

    /// `σ_p²` in rad².
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn is_none(&self) -> bool {
        self.kind == PhaseNoiseKind::None
    }

    /// Von Mises concentration `ς_p = 1/σ_p²`.
    pub fn concentration(&self) -> Option<f64> {
        (self.kind == PhaseNoiseKind::VonMises).then(|| 1.0 / self.power)
    }

    /// Uniform half-width `ι_p = √(3σ_p²)`.
    pub fn half_width(&self) -> Option<f64> {
        (self.kind == PhaseNoiseKind::Uniform).then(|| (3.0 * self.power).sqrt())
    }

    pub fn sampler(&self) -> PhaseNoiseSampler {
        match self.kind {
            PhaseNoiseKind::None => PhaseNoiseSampler::Zero,
            PhaseNoiseKind::Uniform => PhaseNoiseSampler::Uniform {
                half_width: (3.0 * self.power).sqrt(),
            },
            PhaseNoiseKind::VonMises => {
                PhaseNoiseSampler::VonMises(VonMisesSampler::new(1.0 / self.power))
            }
        }
    }
}

/// `E[e^{jθ̃}]` for the given model.
pub fn xi_factor(model: &PhaseNoiseModel) -> f64 {
    match model.kind {
        PhaseNoiseKind::None => 1.0,
        PhaseNoiseKind::VonMises => {
            bessel_i_ratio(1.0 / model.power).expect("positive power gives a finite concentration")
        }
        PhaseNoiseKind::Uniform => sinc((3.0 * model.power).sqrt()),
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Taylor tail is below 1e-20 here
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// `n` i.i.d. phase-noise samples in radians.
pub fn sample_phase_noise<R: Rng + ?Sized>(
    model: &PhaseNoiseModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    let sampler = model.sampler();
    Ok((0..n).map(|_| sampler.sample(rng)).collect())
}

/// Pre-computed sampler for one [`PhaseNoiseModel`].
#[derive(Debug, Clone, Copy)]
pub enum PhaseNoiseSampler {
    Zero,
    Uniform { half_width: f64 },
    VonMises(VonMisesSampler),
}

impl PhaseNoiseSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            Self::VonMises(vm) => vm.sample(rng),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// Zero-mean von Mises sampler (Best & Fisher, 1979). Samples are wrapped
/// onto `(−π, π]`.
#[derive(Debug, Clone, Copy)]
pub struct VonMisesSampler {
    kappa: f64,
    r: f64,
}

impl VonMisesSampler {
    pub fn new(kappa: f64) -> Self {
        assert!(kappa > 0.0 && kappa.is_finite(), "concentration must be positive");
        let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
        let r = (1.0 + rho * rho) / (2.0 * rho);
        Self { kappa, r }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let f = loop {
            let u1: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + self.r * z) / (self.r + z);
            let c = self.kappa * (self.r - f);
            let u2: f64 = rng.random();
            if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
                break f;
            }
        };
        let theta = f.clamp(-1.0, 1.0).acos();
        if rng.random::<bool>() {
            theta
        } else {
            -theta
        }
    }
}

/// One `CN(0, variance)` draw.
#[inline]
pub fn cscg<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `mean + CN(0, variance·I)`, entry by entry.
pub fn sample_cscg<R: Rng + ?Sized>(
    mean: &[Complex64],
    variance: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::Domain(format!(
            "complex Gaussian variance must be finite and >= 0, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(mean.to_vec());
    }
    Ok(mean.iter().map(|&m| m + cscg(variance, rng)).collect())
}
