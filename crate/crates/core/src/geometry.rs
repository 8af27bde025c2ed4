//! Distances, path losses, arrival/departure angles, and line-of-sight
//! steering vectors of the two RIS panels.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{LinkAngles, SceneConfig, Side};

/// Elevation `φ` and azimuth `ϕ` in radians.
pub type Angles = (f64, f64);

/// Derived large-scale quantities of a scene. The LoS vectors are cached here
/// because every closed form and every Monte Carlo trial needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub d_t: f64,
    pub d_r: f64,
    pub d_a: f64,
    pub rho_t: f64,
    pub rho_r: f64,
    pub rho_a: f64,
    pub angles_t: LinkAngles,
    pub angles_r: LinkAngles,
    los_t: LosPair,
    los_r: LosPair,
}

/// `ḡ_i` (UE to RIS) and `ā_i` (RIS to AP) for one panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosPair {
    pub g: Vec<Complex64>,
    pub a: Vec<Complex64>,
}

impl LinkGeometry {
    pub fn distance(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.d_t,
            Side::Reflect => self.d_r,
        }
    }

    pub fn path_loss(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.rho_t,
            Side::Reflect => self.rho_r,
        }
    }

    /// Cascaded large-scale gain `ϱ_i ϱ_a`.
    pub fn cascade_gain(&self, side: Side) -> f64 {
        self.path_loss(side) * self.rho_a
    }

    pub fn angles(&self, side: Side) -> LinkAngles {
        match side {
            Side::Transmit => self.angles_t,
            Side::Reflect => self.angles_r,
        }
    }

    pub fn los(&self, side: Side) -> &LosPair {
        match side {
            Side::Transmit => &self.los_t,
            Side::Reflect => &self.los_r,
        }
    }

    pub fn n_elements(&self, side: Side) -> usize {
        self.los(side).g.len()
    }
}

/// `ϱ_0 d^{−α}`.
pub fn path_loss(rho0: f64, distance: f64, alpha: f64) -> f64 {
    rho0 * distance.powf(-alpha)
}

/// Elevation/azimuth of the direction from the RIS towards `target`, with the
/// panel in the x–z plane: `cos φ = u_z` and `sin φ cos ϕ = u_x`.
pub fn direction_angles(ris: [f64; 3], target: [f64; 3]) -> Result<(Angles, f64)> {
    let v = [target[0] - ris[0], target[1] - ris[1], target[2] - ris[2]];
    let d = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(d > 0.0) {
        return Err(Error::Geometry(format!(
            "node at {target:?} coincides with the RIS"
        )));
    }
    let elevation = (v[2] / d).clamp(-1.0, 1.0).acos();
    let azimuth = v[1].atan2(v[0]);
    Ok(((elevation, azimuth), d))
}

pub fn derive_geometry(scene: &SceneConfig) -> Result<LinkGeometry> {
    scene.validate()?;
    let (aod, d_a) = direction_angles(scene.ris_pos, scene.ap_pos)?;
    let (aoa_t, d_t) = direction_angles(scene.ris_pos, scene.uet_pos)?;
    let (aoa_r, d_r) = direction_angles(scene.ris_pos, scene.uer_pos)?;
    let (angles_t, angles_r) = match scene.angles {
        Some(explicit) => (explicit.t, explicit.r),
        None => (
            LinkAngles {
                arrival: aoa_t,
                departure: aod,
            },
            LinkAngles {
                arrival: aoa_r,
                departure: aod,
            },
        ),
    };
    let pair = |side: Side, angles: LinkAngles| LosPair {
        g: los_vector(scene, side, angles.arrival),
        a: los_vector(scene, side, angles.departure),
    };
    Ok(LinkGeometry {
        d_t,
        d_r,
        d_a,
        rho_t: path_loss(scene.rho0, d_t, scene.alpha_t),
        rho_r: path_loss(scene.rho0, d_r, scene.alpha_r),
        rho_a: path_loss(scene.rho0, d_a, scene.alpha_a),
        angles_t,
        angles_r,
        los_t: pair(Side::Transmit, angles_t),
        los_r: pair(Side::Reflect, angles_r),
    })
}

/// Per-element phase `(2π/λ)(δ_x n_x sin φ cos ϕ + δ_y n_y cos φ)` of a plane
/// wave at the given angles, row-major over `(n_y, n_x)`.
pub fn steering_phases(scene: &SceneConfig, side: Side, angles: Angles) -> Vec<f64> {
    let panel = scene.panel(side);
    let (el, az) = angles;
    let k = 2.0 * PI / scene.wavelength;
    let px = k * scene.spacing_x * el.sin() * az.cos();
    let py = k * scene.spacing_y * el.cos();
    (0..panel.count())
        .map(|n| {
            let (nx, ny) = panel.coords(n);
            px * nx as f64 + py * ny as f64
        })
        .collect()
}

/// Unit-modulus LoS vector with entries `exp(−j·phase)`.
pub fn los_vector(scene: &SceneConfig, side: Side, angles: Angles) -> Vec<Complex64> {
    steering_phases(scene, side, angles)
        .into_iter()
        .map(|p| Complex64::from_polar(1.0, -p))
        .collect()
}
