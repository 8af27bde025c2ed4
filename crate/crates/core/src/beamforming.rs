//! STAR-RIS phase-shift designs.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{steering_phases, LinkGeometry};
use crate::scene::{SceneConfig, Side};

/// Deterministic phase shifts `θ̄` of both panels, each wrapped to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDesign {
    theta_t: Vec<f64>,
    theta_r: Vec<f64>,
    phasors: [Vec<Complex64>; 2],
}

/// Maps any angle into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseDesign {
    pub fn new(theta_t: Vec<f64>, theta_r: Vec<f64>) -> Result<Self> {
        if theta_t.iter().chain(&theta_r).any(|p| !p.is_finite()) {
            return Err(Error::Domain("phase shifts must be finite".into()));
        }
        let theta_t: Vec<f64> = theta_t.into_iter().map(wrap_phase).collect();
        let theta_r: Vec<f64> = theta_r.into_iter().map(wrap_phase).collect();
        let to_phasors = |v: &[f64]| v.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let phasors = [to_phasors(&theta_t), to_phasors(&theta_r)];
        Ok(Self {
            theta_t,
            theta_r,
            phasors,
        })
    }

    /// All-zero phases for the panel sizes of `scene`.
    pub fn zeros(scene: &SceneConfig) -> Self {
        Self::new(
            vec![0.0; scene.n_elements(Side::Transmit)],
            vec![0.0; scene.n_elements(Side::Reflect)],
        )
        .expect("zeros are finite")
    }

    pub fn phases(&self, side: Side) -> &[f64] {
        match side {
            Side::Transmit => &self.theta_t,
            Side::Reflect => &self.theta_r,
        }
    }

    /// `e^{jθ̄_n}` for one panel.
    pub fn phasors(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Transmit => &self.phasors[0],
            Side::Reflect => &self.phasors[1],
        }
    }
}

/// Phases that co-phase the LoS components of both hops, making the coherent
/// sum `Σ ā*ḡ e^{jθ̄}` equal to the element count.
pub fn optimal_phases(geom: &LinkGeometry, scene: &SceneConfig) -> PhaseDesign {
    let panel_phases = |side: Side| -> Vec<f64> {
        let angles = geom.angles(side);
        let arrival = steering_phases(scene, side, angles.arrival);
        let departure = steering_phases(scene, side, angles.departure);
        arrival.iter().zip(&departure).map(|(a, d)| a - d).collect()
    };
    PhaseDesign::new(panel_phases(Side::Transmit), panel_phases(Side::Reflect))
        .expect("steering phases are finite")
}

/// I.i.d. uniform phases on `[0, 2π)`.
pub fn random_phases<R: Rng + ?Sized>(scene: &SceneConfig, rng: &mut R) -> PhaseDesign {
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(0.0..TAU)).collect() };
    let t = draw(scene.n_elements(Side::Transmit));
    let r = draw(scene.n_elements(Side::Reflect));
    PhaseDesign::new(t, r).expect("uniform draws are finite")
}
