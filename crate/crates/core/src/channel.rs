//! Rician small-scale fading, RIS phase noise, and the cascaded equivalent
//! channel of each user.

use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::PhaseDesign;
use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::noise::{cscg, PhaseNoiseSampler};
use crate::scene::{SceneConfig, Side};

/// One draw of every random channel quantity for both panels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g_t: Vec<Complex64>,
    pub g_r: Vec<Complex64>,
    pub a_t: Vec<Complex64>,
    pub a_r: Vec<Complex64>,
    pub theta_t: Vec<f64>,
    pub theta_r: Vec<f64>,
}

impl ChannelRealization {
    /// UE-to-RIS vector `g_i`.
    pub fn g(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Transmit => &self.g_t,
            Side::Reflect => &self.g_r,
        }
    }

    /// RIS-to-AP vector `a_i`.
    pub fn a(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Transmit => &self.a_t,
            Side::Reflect => &self.a_r,
        }
    }

    /// Phase noise `θ̃_i`.
    pub fn phase_noise(&self, side: Side) -> &[f64] {
        match side {
            Side::Transmit => &self.theta_t,
            Side::Reflect => &self.theta_r,
        }
    }
}

fn rician<R: Rng + ?Sized>(los: &[Complex64], kappa: f64, rng: &mut R) -> Vec<Complex64> {
    let los_amp = (kappa / (1.0 + kappa)).sqrt();
    let diffuse = 1.0 / (1.0 + kappa);
    los.iter().map(|&m| los_amp * m + cscg(diffuse, rng)).collect()
}

/// Draws `g_i`, `a_i` and `θ̃_i` for both panels, in that order per panel.
pub fn draw_channels<R: Rng + ?Sized>(
    scene: &SceneConfig,
    geom: &LinkGeometry,
    rng: &mut R,
) -> ChannelRealization {
    let sampler = scene.phase_noise.sampler();
    let mut panel = |side: Side| {
        let los = geom.los(side);
        let g = rician(&los.g, scene.kappa(side), rng);
        let a = rician(&los.a, scene.kappa_a, rng);
        let theta = draw_phase_noise(&sampler, los.g.len(), rng);
        (g, a, theta)
    };
    let (g_t, a_t, theta_t) = panel(Side::Transmit);
    let (g_r, a_r, theta_r) = panel(Side::Reflect);
    ChannelRealization {
        g_t,
        g_r,
        a_t,
        a_r,
        theta_t,
        theta_r,
    }
}

fn draw_phase_noise<R: Rng + ?Sized>(sampler: &PhaseNoiseSampler, n: usize, rng: &mut R) -> Vec<f64> {
    if sampler.is_zero() {
        return vec![0.0; n];
    }
    (0..n).map(|_| sampler.sample(rng)).collect()
}

/// `h_i = √(ϱ_iϱ_a) Σ_n a*_{i,n} e^{j(θ̄_n + θ̃_n)} g_{i,n}`.
pub fn equivalent_channel(
    real: &ChannelRealization,
    design: &PhaseDesign,
    geom: &LinkGeometry,
    side: Side,
) -> Result<Complex64> {
    let (g, a, noise) = (real.g(side), real.a(side), real.phase_noise(side));
    let phasors = design.phasors(side);
    let n = g.len();
    for len in [a.len(), noise.len(), phasors.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut term = a[i].conj() * phasors[i] * g[i];
        if noise[i] != 0.0 {
            term *= Complex64::from_polar(1.0, noise[i]);
        }
        acc += term;
    }
    Ok(geom.cascade_gain(side).sqrt() * acc)
}

/// Both equivalent channels `(h_t, h_r)`.
pub fn equivalent_channels(
    real: &ChannelRealization,
    design: &PhaseDesign,
    geom: &LinkGeometry,
) -> Result<(Complex64, Complex64)> {
    Ok((
        equivalent_channel(real, design, geom, Side::Transmit)?,
        equivalent_channel(real, design, geom, Side::Reflect)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::optimal_phases;
    use crate::geometry::derive_geometry;
    use crate::noise::RngStream;
    use crate::scene::PanelSize;

    fn small_scene(kappa: f64) -> SceneConfig {
        let mut s = SceneConfig::default();
        s.panel_t = PanelSize::new(2, 3);
        s.panel_r = PanelSize::new(3, 2);
        s.kappa_t = kappa;
        s.kappa_r = kappa;
        s.kappa_a = kappa;
        s
    }

    #[test]
    fn dimensions_follow_panels() {
        let s = small_scene(1.0);
        let g = derive_geometry(&s).unwrap();
        let r = draw_channels(&s, &g, &mut RngStream::new(5, 0).rng());
        assert_eq!(r.g_t.len(), 6);
        assert_eq!(r.a_r.len(), 6);
        assert_eq!(r.theta_t, vec![0.0; 6]);
    }

    #[test]
    fn pure_los_limit() {
        let s = small_scene(1e12);
        let g = derive_geometry(&s).unwrap();
        let r = draw_channels(&s, &g, &mut RngStream::new(6, 0).rng());
        for (x, m) in r.g_t.iter().zip(&g.los(Side::Transmit).g) {
            assert!((x - m).norm() < 1e-5);
        }
        let d = optimal_phases(&g, &s);
        let h = equivalent_channel(&r, &d, &g, Side::Transmit).unwrap();
        let expect = g.cascade_gain(Side::Transmit).sqrt() * 6.0;
        assert!((h.norm() / expect - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rician_entry_moments() {
        let n = 100_000;
        for kappa in [0.0, 1.0] {
            let s = small_scene(kappa);
            let g = derive_geometry(&s).unwrap();
            let mut rng = RngStream::new(7, 0).rng();
            let mut mean = Complex64::new(0.0, 0.0);
            let mut power = 0.0;
            for _ in 0..n {
                let r = draw_channels(&s, &g, &mut rng);
                mean += r.g_t[4];
                power += r.g_t[4].norm_sqr();
            }
            mean /= n as f64;
            power /= n as f64;
            let expect = (kappa / (1.0 + kappa)).sqrt() * g.los(Side::Transmit).g[4];
            let se = (1.0 / (1.0 + kappa) / n as f64).sqrt();
            assert!((mean - expect).norm() < 5.0 * se, "kappa {kappa}: {mean} vs {expect}");
            assert!((power - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn single_element_identity() {
        let mut s = small_scene(1.0);
        s.panel_t = PanelSize::new(1, 1);
        let g = derive_geometry(&s).unwrap();
        let one = vec![Complex64::new(1.0, 0.0)];
        let r = ChannelRealization {
            g_t: one.clone(),
            a_t: one,
            theta_t: vec![0.0],
            g_r: vec![],
            a_r: vec![],
            theta_r: vec![],
        };
        let d = PhaseDesign::new(vec![0.0], vec![]).unwrap();
        let h = equivalent_channel(&r, &d, &g, Side::Transmit).unwrap();
        assert!((h.re - g.cascade_gain(Side::Transmit).sqrt()).abs() < 1e-24);
        assert_eq!(h.im, 0.0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let s = small_scene(1.0);
        let g = derive_geometry(&s).unwrap();
        let r = draw_channels(&s, &g, &mut RngStream::new(8, 0).rng());
        let d = PhaseDesign::new(vec![0.0; 5], vec![0.0; 6]).unwrap();
        assert!(matches!(
            equivalent_channel(&r, &d, &g, Side::Transmit),
            Err(Error::LengthMismatch { expected: 6, actual: 5 })
        ));
    }
}
