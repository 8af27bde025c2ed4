//! Achievable rates of the two-user uplink: NOMA with perfect or imperfect
//! SIC under time sharing of the decoding order, and the OMA baseline.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::PhaseDesign;
use crate::error::{invalid, Error, Result};
use crate::estimation::{lmmse_stats, PilotConfig};
use crate::geometry::LinkGeometry;
use crate::scene::{HardwareQuality, SceneConfig, Side};

/// Per-realization inputs of every rate expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub h_hat_t: Complex64,
    pub h_hat_r: Complex64,
    pub err_variance_t: f64,
    pub err_variance_r: f64,
    /// Data transmit powers in watts.
    pub rho_t: f64,
    pub rho_r: f64,
    pub hardware: HardwareQuality,
    pub noise_power: f64,
    /// Residual fraction of the first-decoded user left after SIC.
    pub eta: f64,
    /// Time share of the t→r decoding order.
    pub beta: f64,
    /// OMA resource share of UE-T.
    pub fraction_b: f64,
}

impl RateInputs {
    /// Inputs with perfect CSI, ideal SIC, `β = 0.5` and `B = 0.5`.
    pub fn genie(h_t: Complex64, h_r: Complex64, rho_t: f64, rho_r: f64, scene: &SceneConfig) -> Self {
        Self {
            h_hat_t: h_t,
            h_hat_r: h_r,
            err_variance_t: 0.0,
            err_variance_r: 0.0,
            rho_t,
            rho_r,
            hardware: scene.hardware,
            noise_power: scene.noise_power,
            eta: 0.0,
            beta: 0.5,
            fraction_b: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho_t", self.rho_t),
            ("rho_r", self.rho_r),
            ("err_variance_t", self.err_variance_t),
            ("err_variance_r", self.err_variance_r),
            ("noise_power", self.noise_power),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("eta", self.eta), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    fn rho(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.rho_t,
            Side::Reflect => self.rho_r,
        }
    }

    fn h_hat(&self, side: Side) -> Complex64 {
        match side {
            Side::Transmit => self.h_hat_t,
            Side::Reflect => self.h_hat_r,
        }
    }

    fn err(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.err_variance_t,
            Side::Reflect => self.err_variance_r,
        }
    }

    /// Undistorted received power `ρ_i ε_v ε_{u_i} |ĥ_i|²`.
    pub fn signal(&self, side: Side) -> f64 {
        self.rho(side) * self.hardware.undistorted(side) * self.h_hat(side).norm_sqr()
    }

    /// Impairment term `(1 − ε_v ε_{u_i})|ĥ_i|² + C_ȟȟ,i`.
    pub fn impairment(&self, side: Side) -> f64 {
        (1.0 - self.hardware.undistorted(side)) * self.h_hat(side).norm_sqr() + self.err(side)
    }
}

/// `ℰ = ρ_t ε_t + ρ_r ε_r + σ_w²`.
pub fn effective_noise(inputs: &RateInputs) -> f64 {
    inputs.rho_t * inputs.impairment(Side::Transmit)
        + inputs.rho_r * inputs.impairment(Side::Reflect)
        + inputs.noise_power
}

fn log_rate(signal: f64, interference: f64) -> f64 {
    if signal == 0.0 {
        return 0.0;
    }
    (signal / interference).ln_1p() / std::f64::consts::LN_2
}

/// User rates for each fixed SIC order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRates {
    pub t_tr: f64,
    pub r_tr: f64,
    pub t_rt: f64,
    pub r_rt: f64,
}

fn order_rates(inputs: &RateInputs, eta: f64) -> OrderRates {
    let e = effective_noise(inputs);
    let a_t = inputs.signal(Side::Transmit);
    let a_r = inputs.signal(Side::Reflect);
    OrderRates {
        t_tr: log_rate(a_t, a_r + e),
        r_tr: log_rate(a_r, eta * a_t + e),
        t_rt: log_rate(a_t, eta * a_r + e),
        r_rt: log_rate(a_r, a_t + e),
    }
}

pub fn noma_rates_perfect(inputs: &RateInputs) -> OrderRates {
    order_rates(inputs, 0.0)
}

/// Rates when a fraction `η` of the first-decoded user survives SIC.
pub fn noma_rates_imperfect(inputs: &RateInputs) -> OrderRates {
    order_rates(inputs, inputs.eta)
}

/// `(R_t, R_r, R_t + R_r)` with share `β` spent in the t→r order.
pub fn time_share(rates: &OrderRates, beta: f64) -> (f64, f64, f64) {
    let t = beta * rates.t_tr + (1.0 - beta) * rates.t_rt;
    let r = beta * rates.r_tr + (1.0 - beta) * rates.r_rt;
    (t, r, t + r)
}

/// Perfect-SIC sum rate `log₂(1 + (A_t + A_r)/ℰ)`, which no choice of `β`
/// changes.
pub fn noma_sum_rate(inputs: &RateInputs) -> f64 {
    log_rate(
        inputs.signal(Side::Transmit) + inputs.signal(Side::Reflect),
        effective_noise(inputs),
    )
}

/// Loss of sum rate caused by residual interference after SIC.
pub fn sum_rate_degradation(inputs: &RateInputs) -> f64 {
    let e = effective_noise(inputs);
    let a_t = inputs.signal(Side::Transmit);
    let a_r = inputs.signal(Side::Reflect);
    let eta = inputs.eta;
    let tr = log_rate(eta * a_t, e) - log_rate(eta * a_t, a_r + e);
    let rt = log_rate(eta * a_r, e) - log_rate(eta * a_r, a_t + e);
    inputs.beta * tr + (1.0 - inputs.beta) * rt
}

/// Decoding-order share maximizing the imperfect-SIC sum rate: decode the
/// weaker user first. Ties resolve to `0`.
pub fn optimal_decoding_fraction(inputs: &RateInputs) -> f64 {
    let w = |side: Side| inputs.rho(side) * inputs.hardware.eps_u(side) * inputs.h_hat(side).norm_sqr();
    if w(Side::Transmit) >= w(Side::Reflect) {
        0.0
    } else {
        1.0
    }
}

fn check_fraction(b: f64) -> Result<()> {
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid("fraction_B", format!("must lie in (0, 1), got {b}")));
    }
    Ok(())
}

/// `(R_t, R_r, R_t + R_r)` when UE-T owns a share `B` of the resources.
pub fn oma_rates(inputs: &RateInputs) -> Result<(f64, f64, f64)> {
    let b = inputs.fraction_b;
    check_fraction(b)?;
    let t = b * log_rate(
        inputs.signal(Side::Transmit),
        inputs.rho_t * inputs.impairment(Side::Transmit) + b * inputs.noise_power,
    );
    let r = (1.0 - b)
        * log_rate(
            inputs.signal(Side::Reflect),
            inputs.rho_r * inputs.impairment(Side::Reflect) + (1.0 - b) * inputs.noise_power,
        );
    Ok((t, r, t + r))
}

/// Resource share at which OMA meets the NOMA sum rate,
/// `ρ_t|ĥ_t|² / (ρ_t|ĥ_t|² + ρ_r|ĥ_r|²)`.
pub fn oma_optimal_fraction(inputs: &RateInputs) -> Result<f64> {
    let t = inputs.rho_t * inputs.h_hat_t.norm_sqr();
    let r = inputs.rho_r * inputs.h_hat_r.norm_sqr();
    if !(t + r > 0.0) {
        return Err(Error::Domain("both users have zero received power".into()));
    }
    Ok(t / (t + r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SicMode {
    Perfect,
    Imperfect { eta: f64 },
}

impl SicMode {
    pub fn eta(&self) -> f64 {
        match self {
            SicMode::Perfect => 0.0,
            SicMode::Imperfect { eta } => *eta,
        }
    }
}

/// Every rate of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub orders: OrderRates,
    pub t_noma: f64,
    pub r_noma: f64,
    pub sum_noma: f64,
    pub t_oma: f64,
    pub r_oma: f64,
    pub sum_oma: f64,
}

impl RateReport {
    /// Uses `inputs.eta` when SIC is imperfect and `inputs.beta`,
    /// `inputs.fraction_b` for the splits.
    pub fn compute(inputs: &RateInputs, sic: bool) -> Result<Self> {
        inputs.validate()?;
        let orders = if sic {
            noma_rates_imperfect(inputs)
        } else {
            noma_rates_perfect(inputs)
        };
        let (t_noma, r_noma, sum_noma) = time_share(&orders, inputs.beta);
        let (t_oma, r_oma, sum_oma) = oma_rates(inputs)?;
        Ok(Self {
            orders,
            t_noma,
            r_noma,
            sum_noma,
            t_oma,
            r_oma,
            sum_oma,
        })
    }
}

/// Jensen upper bound on the ergodic perfect-SIC sum rate of the LMMSE
/// receiver, from `|E h_i|² + C_ĥĥ,i` and the error variances.
pub fn ergodic_sum_upper_bound(
    design: &PhaseDesign,
    geom: &LinkGeometry,
    scene: &SceneConfig,
    pilots: &PilotConfig,
    powers: (f64, f64),
) -> Result<f64> {
    let stats = lmmse_stats(design, geom, scene, pilots)?;
    let rho = [powers.0, powers.1];
    let mut signal = 0.0;
    let mut noise = scene.noise_power;
    for ((side, st), rho) in Side::BOTH.into_iter().zip(&stats).zip(rho) {
        let est_power = st.moments.mean.norm_sqr() + st.est_variance;
        let q = scene.hardware.undistorted(side);
        signal += rho * q * est_power;
        noise += rho * ((1.0 - q) * est_power + st.err_variance);
    }
    Ok(log_rate(signal, noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(a_t: f64, a_r: f64, e: f64) -> RateInputs {
        // Ideal hardware, zero error: ℰ = σ², A_i = ρ_i |ĥ_i|².
        let s = SceneConfig {
            noise_power: e,
            ..SceneConfig::default()
        };
        RateInputs::genie(Complex64::new(a_t.sqrt(), 0.0), Complex64::new(0.0, a_r.sqrt()), 1.0, 1.0, &s)
    }

    #[test]
    fn effective_noise_reduces_to_thermal() {
        let i = inputs(2.0, 1.0, 0.7);
        assert_eq!(effective_noise(&i), 0.7);
        let mut j = i;
        j.err_variance_t = 0.5;
        j.err_variance_r = 0.25;
        j.rho_t = 2.0;
        assert!((effective_noise(&j) - (0.7 + 1.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn hand_instance() {
        let r = noma_rates_perfect(&inputs(3.0, 1.0, 1.0));
        assert!((r.t_tr - 2.5f64.log2()).abs() < 1e-14);
        assert!((r.r_tr - 1.0).abs() < 1e-14);
        assert!((r.t_rt - 2.0).abs() < 1e-14);
        assert!((r.r_rt - 1.25f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn single_user_collapse() {
        let mut i = inputs(3.0, 1.0, 1.0);
        i.rho_r = 0.0;
        let r = noma_rates_perfect(&i);
        assert_eq!(r.t_tr, r.t_rt);
        assert!((r.t_tr - 2.0).abs() < 1e-15);
        assert_eq!(r.r_tr, 0.0);
        assert_eq!(r.r_rt, 0.0);
    }

    #[test]
    fn time_share_endpoints_and_sum() {
        let i = inputs(5.0, 0.4, 0.3);
        let r = noma_rates_perfect(&i);
        assert_eq!(time_share(&r, 1.0).0, r.t_tr);
        assert_eq!(time_share(&r, 0.0).1, r.r_rt);
        assert!((time_share(&r, 0.3).2 - noma_sum_rate(&i)).abs() < 1e-12);
        let sym = noma_rates_perfect(&inputs(1.0, 1.0, 0.5));
        let (t, r, _) = time_share(&sym, 0.5);
        assert!((t - r).abs() < 1e-15);
    }

    #[test]
    fn imperfect_sic_reduces_to_perfect() {
        let i = inputs(5.0, 0.4, 0.3);
        assert_eq!(noma_rates_imperfect(&i), noma_rates_perfect(&i));
        assert_eq!(sum_rate_degradation(&i), 0.0);
        let mut j = i;
        j.eta = 1.0;
        let r = noma_rates_imperfect(&j);
        assert_eq!(r.r_tr, r.r_rt);
        assert_eq!(r.t_rt, r.t_tr);
    }

    #[test]
    fn imperfect_hand_instance() {
        let mut i = inputs(3.0, 1.0, 1.0);
        i.eta = 0.1;
        let r = noma_rates_imperfect(&i);
        assert!((r.r_tr - (1.0 + 1.0 / 1.3f64).log2()).abs() < 1e-15);
        assert!((r.t_rt - (1.0 + 3.0 / 1.1f64).log2()).abs() < 1e-15);
        for beta in [0.0, 0.4, 1.0] {
            i.beta = beta;
            let (_, _, sum) = time_share(&noma_rates_imperfect(&i), beta);
            assert!((noma_sum_rate(&i) - sum_rate_degradation(&i) - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn decoding_order_rule() {
        let i = inputs(2.0, 1.0, 1.0);
        assert_eq!(optimal_decoding_fraction(&i), 0.0);
        assert_eq!(optimal_decoding_fraction(&inputs(1.0, 2.0, 1.0)), 1.0);
        assert_eq!(optimal_decoding_fraction(&inputs(1.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn oma_behaviour() {
        let mut i = inputs(4.0, 4.0, 1.0);
        assert_eq!(oma_optimal_fraction(&i).unwrap(), 0.5);
        let (t, r, sum) = oma_rates(&i).unwrap();
        assert!((t - 0.5 * 9f64.log2()).abs() < 1e-15);
        assert_eq!(t, r);
        assert!((sum - noma_sum_rate(&i)).abs() < 1e-12);
        i.fraction_b = 1.0 - 1e-12;
        assert!((oma_rates(&i).unwrap().0 - 5f64.log2()).abs() < 1e-9);
        i.fraction_b = 1.0;
        assert!(oma_rates(&i).is_err());
        let s = SceneConfig::default();
        let g = 1e-5;
        let j = RateInputs::genie(Complex64::new(g, 0.0), Complex64::new(g, 0.0), 100.0, 0.01, &s);
        assert!((oma_optimal_fraction(&j).unwrap() - 10000.0 / 10001.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut i = inputs(1.0, 1.0, 1.0);
        i.eta = 1.5;
        assert!(i.validate().is_err());
        assert!(RateReport::compute(&i, true).is_err());
    }
}
