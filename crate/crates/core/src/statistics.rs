//! Closed-form first and second moments of the equivalent channels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::PhaseDesign;
use crate::geometry::LinkGeometry;
use crate::noise::xi_factor;
use crate::scene::{SceneConfig, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMoments {
    pub mean: Complex64,
    pub second_moment: f64,
    pub variance: f64,
}

/// `Σ_n ā*_{i,n} ḡ_{i,n} e^{jθ̄_n}`.
pub fn coherent_sum(design: &PhaseDesign, geom: &LinkGeometry, side: Side) -> Complex64 {
    let los = geom.los(side);
    los.a
        .iter()
        .zip(&los.g)
        .zip(design.phasors(side))
        .map(|((a, g), p)| a.conj() * g * p)
        .sum()
}

struct Factors {
    gain: f64,
    los_share: f64,
    diffuse_share: f64,
    n: f64,
}

fn factors(geom: &LinkGeometry, scene: &SceneConfig, side: Side) -> Factors {
    let k = scene.kappa(side);
    let ka = scene.kappa_a;
    let denom = (1.0 + k) * (1.0 + ka);
    Factors {
        gain: geom.cascade_gain(side),
        los_share: k * ka / denom,
        diffuse_share: (k + ka + 1.0) / denom,
        n: geom.n_elements(side) as f64,
    }
}

/// Mean, second moment and variance of `h_i` under the given design. The
/// second moment applies `ξ²` to the whole LoS coherent term, so it omits the
/// `κκ_a(1−ξ²)N` contribution of same-element pairs; see
/// [`exact_second_moment`].
pub fn channel_moments(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    side: Side,
) -> ChannelMoments {
    let f = factors(geom, scene, side);
    let xi = xi_factor(&scene.phase_noise);
    let s = coherent_sum(design, geom, side);
    let mean = (f.gain * f.los_share).sqrt() * xi * s;
    let variance = f.gain * f.diffuse_share * f.n;
    let second_moment = f.gain * (f.los_share * xi * xi * s.norm_sqr() + f.diffuse_share * f.n);
    ChannelMoments {
        mean,
        second_moment,
        variance,
    }
}

/// `E|h_i|²` counting same-element pairs without phase-noise attenuation.
pub fn exact_second_moment(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    side: Side,
) -> f64 {
    let f = factors(geom, scene, side);
    let xi = xi_factor(&scene.phase_noise);
    channel_moments(design, geom, scene, side).second_moment
        + f.gain * f.los_share * (1.0 - xi * xi) * f.n
}
