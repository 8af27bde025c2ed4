//! Ratio of modified Bessel functions of the first kind, `I₁(κ)/I₀(κ)`.
//!
//! For `κ ≤ SERIES_LIMIT` both functions are summed from their power series.
//! Above that the large-argument expansions are used; the common `eᵏ/√(2πκ)`
//! prefactor cancels in the ratio, so nothing overflows even for huge `κ`.

use crate::error::{Error, Result};

/// Switch point between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 30.0;

const REL_TOL: f64 = 1e-16;

/// `I₁(κ)/I₀(κ)` for finite `κ > 0`.
pub fn bessel_i_ratio(kappa: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::Domain(format!(
            "Bessel ratio needs a finite positive argument, got {kappa}"
        )));
    }
    let ratio = if kappa <= SERIES_LIMIT {
        series(1, kappa) / series(0, kappa)
    } else {
        asymptotic_sum(1, kappa) / asymptotic_sum(0, kappa)
    };
    Ok(ratio)
}

/// Power series `Σ (x/2)^{2m+ν} / (m! Γ(m+ν+1))` for integer order `ν`.
pub(crate) fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let quarter_sq = half * half;
    let nu = order as f64;
    // first term (x/2)^ν / ν!
    let mut term = (1..=order).fold(1.0, |acc, j| acc * half / j as f64);
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= quarter_sq / (m * (m + nu));
        sum += term;
        if term < REL_TOL * sum {
            break;
        }
    }
    sum
}

/// `Σ_k (−1)^k a_k(ν) / x^k` with `a_k(ν) = Π_{j≤k} (4ν² − (2j−1)²) / (k! 8^k)`,
/// truncated once terms stop shrinking or drop below the tolerance.
pub(crate) fn asymptotic_sum(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < REL_TOL * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    // Trapezoid rule over a full period; exponentially accurate for the
    // smooth periodic integrands here.
    fn quadrature_ratio(kappa: f64) -> f64 {
        let n = 4096;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let th = -std::f64::consts::PI + i as f64 * h;
            // scale by e^{-κ} to keep the integrand bounded
            let w = (kappa * (th.cos() - 1.0)).exp();
            num += th.cos() * w;
            den += w;
        }
        num / den
    }

    #[test]
    fn rejects_bad_arguments() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(bessel_i_ratio(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn frozen_reference_values() {
        // 40-digit values from an arbitrary-precision Bessel implementation
        let cases = [
            (0.1, 0.049_937_603_987_938_92),
            (1.25, 0.527_995_760_399_158_9),
            (10.0, 0.948_599_825_954_846),
            (30.0, 0.983_189_555_365_336_1),
            (30.5, 0.983_467_536_699_444_5),
            (100.0, 0.994_987_373_005_168_8),
        ];
        for (k, want) in cases {
            let got = bessel_i_ratio(k).unwrap();
            assert!((got - want).abs() < 1e-14, "kappa={k}: {got} vs {want}");
        }
    }

    #[test]
    fn approaches_one_for_large_kappa() {
        let r = bessel_i_ratio(1e6).unwrap();
        assert!(r > 0.999_999 && r < 1.0);
    }

    #[test]
    fn agrees_with_quadrature() {
        let mut k = 0.1;
        while k <= 100.0 {
            let got = bessel_i_ratio(k).unwrap();
            let want = quadrature_ratio(k);
            assert!((got - want).abs() < 1e-10, "kappa={k}: {got} vs {want}");
            k *= 1.37;
        }
    }

    #[test]
    fn series_and_expansion_meet_at_switch_point() {
        for x in [SERIES_LIMIT - 1.0, SERIES_LIMIT, SERIES_LIMIT + 1.0] {
            let s = series(1, x) / series(0, x);
            let a = asymptotic_sum(1, x) / asymptotic_sum(0, x);
            assert!((s - a).abs() < 1e-12, "x={x}: {s} vs {a}");
        }
    }

    #[test]
    fn ratio_is_increasing_in_kappa() {
        let mut prev = 0.0;
        for i in 1..200 {
            let r = bessel_i_ratio(i as f64 * 0.5).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }
}
