//! Standard-Normal density, distribution and quantile functions, plus the
//! probabilists' Hermite polynomials.
//!
//! The unchecked kernels [`norm_pdf`], [`norm_cdf`] and [`norm_quantile`] are
//! used internally by every other module. The `std_normal_*` wrappers validate
//! their inputs and are the public contract.

use crate::error::{ensure_finite, ensure_probability, Error, Result};

/// 1/√(2π)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this |z| the Taylor series is used for Φ, above it the
/// Laplace continued fraction for the Mills ratio.
const SERIES_CUTOFF: f64 = 3.0;

const MAX_HERMITE_DEGREE: usize = 8;

#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Upper tail Q(x) = 1 − Φ(x) for x > 0 via the continued fraction
/// Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
fn upper_tail_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    norm_pdf(x) / f
}

/// Φ(z) − 1/2 = φ(z)·Σ z^{2k+1} / (2k+1)!!  (all terms positive for z > 0).
fn central_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut k = 1.0;
    loop {
        term *= z2 / (2.0 * k + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    norm_pdf(z) * sum
}

/// Standard Normal CDF. NaN propagates; ±∞ map to 1 and 0.
pub fn norm_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z.abs() <= SERIES_CUTOFF {
        0.5 + central_series(z)
    } else if z < 0.0 {
        if z == f64::NEG_INFINITY {
            0.0
        } else {
            upper_tail_cf(-z)
        }
    } else if z == f64::INFINITY {
        1.0
    } else {
        1.0 - upper_tail_cf(z)
    }
}

/// Upper tail 1 − Φ(z), accurate in relative terms for large positive z.
pub fn norm_sf(z: f64) -> f64 {
    norm_cdf(-z)
}

// Acklam's rational approximation (relative error below 1.15e-9).
const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const ACKLAM_P_LOW: f64 = 0.02425;

fn acklam_lower_half(p: f64) -> f64 {
    let (a, b, c, d) = (ACKLAM_A, ACKLAM_B, ACKLAM_C, ACKLAM_D);
    if p < ACKLAM_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    }
}

/// Φ⁻¹(p) for p in (0, 1); returns NaN outside.
pub fn norm_quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    if p > 0.5 {
        // 1 − p is exact for p ≥ 1/2
        return -norm_quantile(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let x0 = acklam_lower_half(p);
    let density = norm_pdf(x0);
    if density == 0.0 {
        return x0;
    }
    x0 - (norm_cdf(x0) - p) / density
}

pub fn std_normal_pdf(z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    Ok(norm_pdf(z))
}

pub fn std_normal_cdf(z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    Ok(norm_cdf(z))
}

pub fn std_normal_quantile(p: f64) -> Result<f64> {
    ensure_probability("p", p)?;
    Ok(norm_quantile(p))
}

/// Degree of a probabilists' Hermite polynomial, capped at 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HermiteIndex(usize);

impl HermiteIndex {
    pub fn new(j: usize) -> Result<Self> {
        if j > MAX_HERMITE_DEGREE {
            Err(Error::UnsupportedDegree(j))
        } else {
            Ok(Self(j))
        }
    }

    pub fn degree(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for HermiteIndex {
    type Error = Error;

    fn try_from(j: usize) -> Result<Self> {
        Self::new(j)
    }
}

/// He_j(z) by the three-term recurrence He_{k+1} = z·He_k − k·He_{k−1}.
pub fn hermite_he(j: HermiteIndex, z: f64) -> f64 {
    let mut prev = 1.0;
    if j.0 == 0 {
        return prev;
    }
    let mut cur = z;
    for k in 1..j.0 {
        let next = z * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Convenience wrapper that validates the degree.
pub fn hermite(j: usize, z: f64) -> Result<f64> {
    Ok(hermite_he(HermiteIndex::new(j)?, z))
}
