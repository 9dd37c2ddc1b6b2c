//! Edgeworth corrections to the CDF and PDF of the standardized mean
//! Z_n = (Ȳ_n − μ)√n/σ.
//!
//! All expansions are formal: values are never clamped, and [`FormalValue`]
//! reports when a CDF value leaves [0, 1] or a density goes negative.

use serde::{Deserialize, Serialize};

use crate::dist_model::{ceil_at_least_one, MomentSummary};
use crate::error::{ensure_finite, ensure_sample_size, invalid, Result};
use crate::special_fns::{norm_cdf, norm_pdf};

/// Order of the approximation: O(1), O(n^{-1/2}) or O(n^{-1}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ApproxOrder {
    Order1,
    OrderSqrtN,
    OrderN,
}

impl ApproxOrder {
    pub const ALL: [ApproxOrder; 3] = [Self::Order1, Self::OrderSqrtN, Self::OrderN];
}

impl std::str::FromStr for ApproxOrder {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "o1" | "order1" => Ok(Self::Order1),
            "sqrt-n" | "half" | "order-sqrt-n" => Ok(Self::OrderSqrtN),
            "n" | "order-n" => Ok(Self::OrderN),
            other => Err(invalid(format!(
                "unknown order `{other}` (expected 1, sqrt-n or n)"
            ))),
        }
    }
}

/// An evaluation request: sample size, point (z, or p on the quantile
/// scale), optional accuracy target, and correction order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxQuery {
    pub n: u64,
    pub point: f64,
    pub epsilon: Option<f64>,
    pub order: ApproxOrder,
}

impl ApproxQuery {
    /// Query on the z (CDF/PDF) scale.
    pub fn at_z(n: u64, z: f64, order: ApproxOrder) -> Result<Self> {
        ensure_sample_size(n)?;
        ensure_finite("z", z)?;
        Ok(Self { n, point: z, epsilon: None, order })
    }

    /// Query on the quantile scale.
    pub fn at_p(n: u64, p: f64, order: ApproxOrder) -> Result<Self> {
        ensure_sample_size(n)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("quantile level must lie in (0, 1), got {p}")));
        }
        Ok(Self { n, point: p, epsilon: None, order })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(invalid(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
        }
        self.epsilon = Some(epsilon);
        Ok(self)
    }
}

/// A value produced by a formal expansion plus a flag set when the value
/// escapes the range a true CDF/PDF/quantile function would respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormalValue {
    pub value: f64,
    pub out_of_range: bool,
}

impl FormalValue {
    pub(crate) fn cdf(value: f64) -> Self {
        Self { value, out_of_range: !(0.0..=1.0).contains(&value) }
    }

    pub(crate) fn density(value: f64) -> Self {
        Self { value, out_of_range: value < 0.0 }
    }
}

/// A_n(z) = −λ·φ(z)·(z² − 1)/(6√n).
pub fn cdf_correction_a(n: u64, z: f64, skewness: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    Ok(a_term(n as f64, z, skewness))
}

/// B_n(z) = (1/24n)·[η·φ'''(z) + (λ²/3)·φ⁽⁵⁾(z)]
///        = −φ(z)·[3η·He₃(z) + λ²·He₅(z)]/(72n).
pub fn cdf_correction_b(n: u64, z: f64, skewness: f64, excess_kurtosis: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    Ok(b_term(n as f64, z, skewness, excess_kurtosis))
}

/// The kurtosis term with He₄ in place of −He₃:
/// φ(z)·[3η(z⁴ − 6z² + 3) − λ²z(z⁴ − 10z² + 15)]/(72n).
///
/// This closed form does not differentiate to the density term D_n. It is
/// kept for the sample-size solver, see
/// [`crate::sizing_bounds::KurtosisTermForm`].
pub fn cdf_correction_b_he4(n: u64, z: f64, skewness: f64, excess_kurtosis: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    Ok(b_term_he4(n as f64, z, skewness, excess_kurtosis))
}

/// C_n(z) = λ·φ(z)·z(z² − 3)/(6√n).
pub fn pdf_correction_c(n: u64, z: f64, skewness: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    Ok(c_term(n as f64, z, skewness))
}

/// D_n(z) = φ(z)·[3η(z⁴ − 6z² + 3) + λ²(z⁶ − 15z⁴ + 45z² − 15)]/(72n).
pub fn pdf_correction_d(n: u64, z: f64, skewness: f64, excess_kurtosis: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    Ok(d_term(n as f64, z, skewness, excess_kurtosis))
}

#[inline]
pub(crate) fn a_term(n: f64, z: f64, lambda: f64) -> f64 {
    -lambda * norm_pdf(z) * (z * z - 1.0) / (6.0 * n.sqrt())
}

#[inline]
pub(crate) fn b_term(n: f64, z: f64, lambda: f64, eta: f64) -> f64 {
    let z2 = z * z;
    let he3 = z * (z2 - 3.0);
    let he5 = z * (z2 * z2 - 10.0 * z2 + 15.0);
    -norm_pdf(z) * (3.0 * eta * he3 + lambda * lambda * he5) / (72.0 * n)
}

#[inline]
pub(crate) fn b_term_he4(n: f64, z: f64, lambda: f64, eta: f64) -> f64 {
    let z2 = z * z;
    let he4 = z2 * z2 - 6.0 * z2 + 3.0;
    let he5 = z * (z2 * z2 - 10.0 * z2 + 15.0);
    norm_pdf(z) * (3.0 * eta * he4 - lambda * lambda * he5) / (72.0 * n)
}

#[inline]
pub(crate) fn c_term(n: f64, z: f64, lambda: f64) -> f64 {
    lambda * norm_pdf(z) * z * (z * z - 3.0) / (6.0 * n.sqrt())
}

#[inline]
pub(crate) fn d_term(n: f64, z: f64, lambda: f64, eta: f64) -> f64 {
    let z2 = z * z;
    let he4 = z2 * z2 - 6.0 * z2 + 3.0;
    let he6 = z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0;
    norm_pdf(z) * (3.0 * eta * he4 + lambda * lambda * he6) / (72.0 * n)
}

/// Φ(z), Φ(z) + A_n(z) or Φ(z) + A_n(z) + B_n(z) according to `query.order`.
pub fn edgeworth_cdf(query: &ApproxQuery, ms: &MomentSummary) -> Result<FormalValue> {
    ensure_sample_size(query.n)?;
    ensure_finite("z", query.point)?;
    let (n, z, lambda) = (query.n as f64, query.point, ms.skewness);
    let value = match query.order {
        ApproxOrder::Order1 => norm_cdf(z),
        ApproxOrder::OrderSqrtN => norm_cdf(z) + a_term(n, z, lambda),
        ApproxOrder::OrderN => {
            let eta = ms.require_kurtosis()?;
            norm_cdf(z) + a_term(n, z, lambda) + b_term(n, z, lambda, eta)
        }
    };
    Ok(FormalValue::cdf(value))
}

/// φ(z), φ(z) + C_n(z) or φ(z) + C_n(z) + D_n(z) according to `query.order`.
pub fn edgeworth_pdf(query: &ApproxQuery, ms: &MomentSummary) -> Result<FormalValue> {
    ensure_sample_size(query.n)?;
    ensure_finite("z", query.point)?;
    let (n, z, lambda) = (query.n as f64, query.point, ms.skewness);
    let value = match query.order {
        ApproxOrder::Order1 => norm_pdf(z),
        ApproxOrder::OrderSqrtN => norm_pdf(z) + c_term(n, z, lambda),
        ApproxOrder::OrderN => {
            let eta = ms.require_kurtosis()?;
            norm_pdf(z) + c_term(n, z, lambda) + d_term(n, z, lambda, eta)
        }
    };
    Ok(FormalValue::density(value))
}

/// Least n with τ(n, z, λ) = 1 + λz(z² − 3)/(6√n) > 0 for every z in (z*, 0].
///
/// For z* ≥ −√3 the cubic z(z² − 3) is non-negative on (z*, 0], so n = 1.
pub fn min_n_nonneg_pdf(skewness: f64, z_star: f64) -> Result<u64> {
    if !(skewness > 0.0 && skewness.is_finite()) {
        return Err(invalid(format!(
            "skewness must be positive for the left-tail guard, got {skewness}"
        )));
    }
    ensure_finite("z_star", z_star)?;
    if z_star >= 0.0 {
        return Err(invalid(format!("z* must be negative, got {z_star}")));
    }
    if z_star >= -(3f64.sqrt()) {
        return Ok(1);
    }
    let root = skewness * z_star * (3.0 - z_star * z_star) / 6.0;
    Ok(ceil_at_least_one(root * root))
}

/// τ(n, z, λ), the factor multiplying φ(z) in the O(n^{-1/2}) density.
pub fn tau(n: f64, z: f64, skewness: f64) -> f64 {
    1.0 + skewness * z * (z * z - 3.0) / (6.0 * n.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::FRAC_1_SQRT_2PI;

    fn shape(lambda: f64, eta: f64) -> MomentSummary {
        MomentSummary::standardized(lambda, Some(eta)).unwrap()
    }

    #[test]
    fn a_examples() {
        assert_eq!(cdf_correction_a(7, 0.3, 0.0).unwrap(), 0.0);
        assert_eq!(cdf_correction_a(7, 1.0, 2.5).unwrap(), 0.0);
        assert_eq!(cdf_correction_a(7, -1.0, 2.5).unwrap(), 0.0);
        let a = cdf_correction_a(50, 0.0, 5.07).unwrap();
        assert!((a - 0.047_67).abs() < 1e-5);
        // A_n(0)·6√(2πn) = λ
        for n in [1u64, 9, 50, 1000] {
            let a = cdf_correction_a(n, 0.0, 3.3).unwrap();
            assert!((a * 6.0 * (2.0 * std::f64::consts::PI * n as f64).sqrt() - 3.3).abs() < 1e-13);
        }
        assert!(cdf_correction_a(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn b_examples() {
        assert_eq!(cdf_correction_b(10, 0.7, 0.0, 0.0).unwrap(), 0.0);
        // He₃(0) = He₅(0) = 0
        assert_eq!(cdf_correction_b(50, 0.0, 5.07, 33.81).unwrap(), 0.0);
        let b = cdf_correction_b_he4(50, 0.0, 5.07, 33.81).unwrap();
        assert!((b - 9.0 * 33.81 * FRAC_1_SQRT_2PI / (72.0 * 50.0)).abs() < 1e-15);
        assert!((b - 0.033_72).abs() < 1e-5);
        let (n0, z) = (17u64, 0.9);
        let small = cdf_correction_b(n0, z, 1.2, 3.0).unwrap();
        let big = cdf_correction_b(1000 * n0, z, 1.2, 3.0).unwrap();
        assert!((small / big - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn c_and_d_zeros() {
        for z in [0.0, 3f64.sqrt(), -(3f64.sqrt())] {
            assert!(pdf_correction_c(9, z, 2.0).unwrap().abs() < 1e-15);
        }
        assert_eq!(pdf_correction_c(9, 0.4, 0.0).unwrap(), 0.0);
        assert_eq!(pdf_correction_d(9, 0.4, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn normal_case_reduces_to_limit() {
        let ms = shape(0.0, 0.0);
        for order in ApproxOrder::ALL {
            for z in [-2.0, -0.5, 0.0, 1.3] {
                let q = ApproxQuery::at_z(5, z, order).unwrap();
                assert_eq!(edgeworth_cdf(&q, &ms).unwrap().value, norm_cdf(z));
                assert_eq!(edgeworth_pdf(&q, &ms).unwrap().value, norm_pdf(z));
            }
        }
    }

    #[test]
    fn right_tail_hand_value() {
        let ms = shape(5.07, 33.81);
        let q = ApproxQuery::at_z(50, 2.576, ApproxOrder::OrderSqrtN).unwrap();
        let v = edgeworth_cdf(&q, &ms).unwrap().value;
        assert!((v - 0.985_26).abs() < 2e-5, "{v}");
    }

    #[test]
    fn missing_kurtosis() {
        let ms = MomentSummary::standardized(1.0, None).unwrap();
        let q = ApproxQuery::at_z(5, 0.0, ApproxOrder::OrderN).unwrap();
        assert!(edgeworth_cdf(&q, &ms).is_err());
        assert!(edgeworth_pdf(&q, &ms).is_err());
        let q = ApproxQuery::at_z(5, 0.0, ApproxOrder::OrderSqrtN).unwrap();
        assert!(edgeworth_cdf(&q, &ms).is_ok());
    }

    #[test]
    fn negative_density_flagged() {
        let ms = shape(5.07, 33.81);
        let q = ApproxQuery::at_z(4, -2.5, ApproxOrder::OrderSqrtN).unwrap();
        let v = edgeworth_pdf(&q, &ms).unwrap();
        assert!(v.value < 0.0 && v.out_of_range);
        let q = ApproxQuery::at_z(4, 0.0, ApproxOrder::OrderSqrtN).unwrap();
        assert!(!edgeworth_pdf(&q, &ms).unwrap().out_of_range);
    }

    #[test]
    fn derivative_consistency() {
        let ms = shape(1.7, 4.2);
        let h = 1e-5;
        for order in ApproxOrder::ALL {
            let mut z = -4.0;
            while z <= 4.0 {
                let f = |x: f64| {
                    edgeworth_cdf(&ApproxQuery::at_z(6, x, order).unwrap(), &ms).unwrap().value
                };
                let fd = (f(z + h) - f(z - h)) / (2.0 * h);
                let pdf = edgeworth_pdf(&ApproxQuery::at_z(6, z, order).unwrap(), &ms)
                    .unwrap()
                    .value;
                assert!((fd - pdf).abs() < 1e-6, "order {order:?} z={z}: {fd} vs {pdf}");
                z += 0.05;
            }
        }
    }

    #[test]
    fn tail_limits() {
        for &(lambda, eta) in &[(6.0, 40.0), (-6.0, 40.0), (0.5, 0.0), (3.0, 12.0)] {
            let ms = shape(lambda, eta);
            for n in [2u64, 10, 100] {
                for order in ApproxOrder::ALL {
                    let lo = edgeworth_cdf(&ApproxQuery::at_z(n, -8.0, order).unwrap(), &ms)
                        .unwrap()
                        .value;
                    let hi = edgeworth_cdf(&ApproxQuery::at_z(n, 8.0, order).unwrap(), &ms)
                        .unwrap()
                        .value;
                    assert!(lo.abs() < 1e-10 && (hi - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn nonneg_threshold_examples() {
        assert_eq!(min_n_nonneg_pdf(5.07, -3.0).unwrap(), 232);
        assert_eq!(min_n_nonneg_pdf(2.0, -3.0).unwrap(), 36);
        assert_eq!(min_n_nonneg_pdf(2.0, -1.0).unwrap(), 1);
        assert!(min_n_nonneg_pdf(0.0, -3.0).is_err());
        assert!(min_n_nonneg_pdf(-1.0, -3.0).is_err());
        assert!(min_n_nonneg_pdf(1.0, 0.5).is_err());
    }

    #[test]
    fn nonneg_threshold_grid_oracle() {
        // probe (z*, 0] on a 1e−3 grid plus points approaching z* from above
        for &(lambda, z_star) in &[(5.07, -3.0), (2.0, -3.0), (3.5, -2.4), (8.0, -2.9)] {
            let n = min_n_nonneg_pdf(lambda, z_star).unwrap();
            let mut probes: Vec<f64> = (1..=((-z_star) * 1000.0) as usize)
                .map(|i| z_star + i as f64 * 1e-3)
                .collect();
            probes.extend((3..12).map(|k| z_star + 10f64.powi(-k)));
            assert!(probes.iter().all(|&z| tau(n as f64, z, lambda) > 0.0));
            if n > 1 {
                assert!(probes.iter().any(|&z| tau((n - 1) as f64, z, lambda) <= 0.0));
            }
        }
    }
}
