//! Cornish–Fisher corrections on the quantile scale.

use crate::dist_model::MomentSummary;
use crate::edgeworth::{ApproxOrder, ApproxQuery};
use crate::error::{ensure_probability, ensure_sample_size, invalid, Result};
use crate::special_fns::{hermite_he, norm_quantile, HermiteIndex};

/// U_n(p) = λ·He₂(Φ⁻¹(p))/(6√n).
pub fn cf_correction_u(n: u64, p: f64, skewness: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    ensure_probability("p", p)?;
    Ok(u_term(n as f64, norm_quantile(p), skewness))
}

/// V_n(p) = z·{3η(z² − 3) + 2λ²(5 − 2z²)}/(72n), z = Φ⁻¹(p).
pub fn cf_correction_v(n: u64, p: f64, skewness: f64, excess_kurtosis: f64) -> Result<f64> {
    ensure_sample_size(n)?;
    ensure_probability("p", p)?;
    Ok(v_term(n as f64, norm_quantile(p), skewness, excess_kurtosis))
}

/// V_n(p) in Hermite form: η·He₃(z)/(24n) − λ²·(2He₃(z) + He₁(z))/(36n).
/// Algebraically identical to [`cf_correction_v`]; kept as a cross-check.
pub fn cf_correction_v_hermite(
    n: u64,
    p: f64,
    skewness: f64,
    excess_kurtosis: f64,
) -> Result<f64> {
    ensure_sample_size(n)?;
    ensure_probability("p", p)?;
    let z = norm_quantile(p);
    let he = |j| hermite_he(HermiteIndex::new(j).expect("degree ≤ 8"), z);
    let n = n as f64;
    Ok(excess_kurtosis * he(3) / (24.0 * n)
        - skewness * skewness * (2.0 * he(3) + he(1)) / (36.0 * n))
}

#[inline]
fn u_term(n: f64, z: f64, lambda: f64) -> f64 {
    lambda * (z * z - 1.0) / (6.0 * n.sqrt())
}

#[inline]
fn v_term(n: f64, z: f64, lambda: f64, eta: f64) -> f64 {
    let z2 = z * z;
    z * (3.0 * eta * (z2 - 3.0) + 2.0 * lambda * lambda * (5.0 - 2.0 * z2)) / (72.0 * n)
}

/// Φ⁻¹(p), Φ⁻¹(p) + U_n(p) or Φ⁻¹(p) + U_n(p) + V_n(p) by `query.order`.
pub fn cf_quantile(query: &ApproxQuery, ms: &MomentSummary) -> Result<f64> {
    ensure_sample_size(query.n)?;
    let p = query.point;
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let (n, z, lambda) = (query.n as f64, norm_quantile(p), ms.skewness);
    Ok(match query.order {
        ApproxOrder::Order1 => z,
        ApproxOrder::OrderSqrtN => z + u_term(n, z, lambda),
        ApproxOrder::OrderN => {
            let eta = ms.require_kurtosis()?;
            z + u_term(n, z, lambda) + v_term(n, z, lambda, eta)
        }
    })
}

/// Quantile approximations over a grid of levels, with a flag set when the
/// formal expansion fails to be strictly increasing along the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileCurve {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    pub non_monotone: bool,
}

pub fn cf_quantile_curve(
    n: u64,
    levels: &[f64],
    order: ApproxOrder,
    ms: &MomentSummary,
) -> Result<QuantileCurve> {
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("quantile levels must be strictly increasing"));
    }
    let values = levels
        .iter()
        .map(|&p| cf_quantile(&ApproxQuery::at_p(n, p, order)?, ms))
        .collect::<Result<Vec<_>>>()?;
    let non_monotone = values.windows(2).any(|w| w[1] <= w[0]);
    Ok(QuantileCurve { levels: levels.to_vec(), values, non_monotone })
}
