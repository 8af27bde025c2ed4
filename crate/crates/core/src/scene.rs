//! System parameters for one STAR-RIS deployment.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::noise::PhaseNoiseModel;

/// Which half of the STAR-RIS a quantity belongs to: the transmitting panel
/// serving UE-T, or the reflecting panel serving UE-R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[serde(rename = "t")]
    Transmit,
    #[serde(rename = "r")]
    Reflect,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Transmit, Side::Reflect];

    pub fn label(self) -> &'static str {
        match self {
            Side::Transmit => "t",
            Side::Reflect => "r",
        }
    }
}

/// Rectangular element grid, `nx` along the horizontal axis and `ny` vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelSize {
    pub nx: usize,
    pub ny: usize,
}

impl PanelSize {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny }
    }

    /// Most square `nx × ny` layout with `nx ≤ ny` holding `n` elements.
    pub fn with_count(n: usize) -> Self {
        let mut nx = (n as f64).sqrt() as usize;
        while nx > 1 && !n.is_multiple_of(nx) {
            nx -= 1;
        }
        let nx = nx.max(1);
        Self { nx, ny: n / nx }
    }

    pub fn count(&self) -> usize {
        self.nx * self.ny
    }

    /// `(n_x, n_y)` for linear index `n = n_y·N_x + n_x`.
    pub fn coords(&self, n: usize) -> (usize, usize) {
        (n % self.nx, n / self.nx)
    }
}

/// Transceiver hardware quality factors; 1 is ideal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareQuality {
    pub eps_v: f64,
    pub eps_ut: f64,
    pub eps_ur: f64,
}

impl Default for HardwareQuality {
    fn default() -> Self {
        Self::ideal()
    }
}

impl HardwareQuality {
    pub fn ideal() -> Self {
        Self::uniform(1.0)
    }

    /// Same factor at the AP and both UEs.
    pub fn uniform(eps: f64) -> Self {
        Self {
            eps_v: eps,
            eps_ut: eps,
            eps_ur: eps,
        }
    }

    pub fn eps_u(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.eps_ut,
            Side::Reflect => self.eps_ur,
        }
    }

    /// `ε_v ε_{u_i}`: fraction of power reaching the receiver undistorted.
    pub fn undistorted(&self, side: Side) -> f64 {
        self.eps_v * self.eps_u(side)
    }

    pub fn is_ideal(&self) -> bool {
        self.eps_v == 1.0 && self.eps_ut == 1.0 && self.eps_ur == 1.0
    }
}

/// Elevation/azimuth pairs for one panel, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkAngles {
    pub arrival: (f64, f64),
    pub departure: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitAngles {
    pub t: LinkAngles,
    pub r: LinkAngles,
}

/// Geometry, propagation, and impairment parameters. All values are linear
/// (watts, meters, ratios); dB conversion happens at the I/O boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub ap_pos: [f64; 3],
    pub uet_pos: [f64; 3],
    pub uer_pos: [f64; 3],
    pub ris_pos: [f64; 3],
    pub panel_t: PanelSize,
    pub panel_r: PanelSize,
    pub spacing_x: f64,
    pub spacing_y: f64,
    pub wavelength: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
    pub kappa_a: f64,
    pub alpha_t: f64,
    pub alpha_r: f64,
    pub alpha_a: f64,
    /// Path loss at the 1 m reference distance.
    pub rho0: f64,
    /// Receiver noise power `σ_w²` in watts.
    pub noise_power: f64,
    pub hardware: HardwareQuality,
    pub phase_noise: PhaseNoiseModel,
    /// Overrides the angles derived from positions when set.
    pub angles: Option<ExplicitAngles>,
}

pub const DEFAULT_WAVELENGTH: f64 = 0.1;

impl Default for SceneConfig {
    /// The reference deployment: 20×20 panels at half-wavelength spacing,
    /// 0 dB Rician factors, −30 dB reference loss, −100 dBm noise.
    fn default() -> Self {
        Self {
            ap_pos: [0.0, -80.0, 20.0],
            uet_pos: [0.0, 20.0, 5.0],
            uer_pos: [0.0, -20.0, 5.0],
            ris_pos: [0.0, 0.0, 15.0],
            panel_t: PanelSize::new(20, 20),
            panel_r: PanelSize::new(20, 20),
            spacing_x: 0.5 * DEFAULT_WAVELENGTH,
            spacing_y: 0.5 * DEFAULT_WAVELENGTH,
            wavelength: DEFAULT_WAVELENGTH,
            kappa_t: 1.0,
            kappa_r: 1.0,
            kappa_a: 1.0,
            alpha_t: 2.542,
            alpha_r: 2.542,
            alpha_a: 2.4,
            rho0: 1e-3,
            noise_power: 1e-13,
            hardware: HardwareQuality::ideal(),
            phase_noise: PhaseNoiseModel::none(),
            angles: None,
        }
    }
}

impl SceneConfig {
    pub fn panel(&self, side: Side) -> PanelSize {
        match side {
            Side::Transmit => self.panel_t,
            Side::Reflect => self.panel_r,
        }
    }

    pub fn n_elements(&self, side: Side) -> usize {
        self.panel(side).count()
    }

    pub fn kappa(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.kappa_t,
            Side::Reflect => self.kappa_r,
        }
    }

    pub fn ue_pos(&self, side: Side) -> [f64; 3] {
        match side {
            Side::Transmit => self.uet_pos,
            Side::Reflect => self.uer_pos,
        }
    }

    /// Sets both panels to `n` elements in the most square layout.
    pub fn set_elements(&mut self, n: usize) {
        self.panel_t = PanelSize::with_count(n);
        self.panel_r = self.panel_t;
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("panel_t", self.panel_t),
            ("panel_r", self.panel_r),
        ] {
            if p.nx == 0 || p.ny == 0 {
                return Err(invalid(name, "element counts must be >= 1"));
            }
        }
        for (name, v) in [
            ("spacing_x", self.spacing_x),
            ("spacing_y", self.spacing_y),
            ("wavelength", self.wavelength),
            ("alpha_t", self.alpha_t),
            ("alpha_r", self.alpha_r),
            ("alpha_a", self.alpha_a),
            ("rho0", self.rho0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("kappa_t", self.kappa_t),
            ("kappa_r", self.kappa_r),
            ("kappa_a", self.kappa_a),
            ("noise_power", self.noise_power),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("eps_v", self.hardware.eps_v),
            ("eps_ut", self.hardware.eps_ut),
            ("eps_ur", self.hardware.eps_ur),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        for (name, p) in [
            ("ap_pos", self.ap_pos),
            ("uet_pos", self.uet_pos),
            ("uer_pos", self.uer_pos),
            ("ris_pos", self.ris_pos),
        ] {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(invalid(name, "coordinates must be finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SceneConfig::default().validate().unwrap();
        assert_eq!(SceneConfig::default().n_elements(Side::Transmit), 400);
    }

    #[test]
    fn layouts() {
        assert_eq!(PanelSize::with_count(400), PanelSize::new(20, 20));
        assert_eq!(PanelSize::with_count(800), PanelSize::new(25, 32));
        assert_eq!(PanelSize::with_count(7), PanelSize::new(1, 7));
        assert_eq!(PanelSize::with_count(1), PanelSize::new(1, 1));
        let p = PanelSize::new(3, 2);
        assert_eq!(p.coords(4), (1, 1));
    }

    #[test]
    fn rejects_out_of_range() {
        let mut s = SceneConfig::default();
        s.hardware.eps_v = 1.2;
        assert!(s.validate().is_err());
        let mut s = SceneConfig::default();
        s.panel_t.nx = 0;
        assert!(s.validate().is_err());
        let mut s = SceneConfig::default();
        s.kappa_a = -1.0;
        assert!(s.validate().is_err());
    }
}
