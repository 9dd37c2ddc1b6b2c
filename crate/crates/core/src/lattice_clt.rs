//! The O(n^{-1/2}) Edgeworth correction for lattice summands.
//!
//! For summands on {a + k·h}, the CDF of Z_n jumps wherever
//! (z√n − n·a*)/h* is an integer, and the smooth expansion has to be
//! supplemented by a period-1 sawtooth J that carries the jumps.

use serde::{Deserialize, Serialize};

use crate::dist_model::MomentSummary;
use crate::edgeworth::{a_term, ApproxQuery, FormalValue};
use crate::error::{ensure_finite, ensure_sample_size, invalid, Error, Result};
use crate::special_fns::norm_cdf;

pub use crate::dist_model::{standardize_lattice, LatticeSpec};

/// Number of Fourier terms ℓ used for J.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZigzagConfig {
    terms: u32,
}

impl ZigzagConfig {
    pub fn new(terms: u32) -> Result<Self> {
        if terms == 0 {
            return Err(invalid("zig-zag truncation must use at least one term"));
        }
        Ok(Self { terms })
    }

    pub fn terms(self) -> u32 {
        self.terms
    }
}

impl Default for ZigzagConfig {
    fn default() -> Self {
        Self { terms: 1000 }
    }
}

/// sin(2πx) for x already reduced to [−½, ½], exact at 0 and ±½.
#[inline]
fn sin_2pi_reduced(x: f64) -> f64 {
    if x == 0.0 || x.abs() == 0.5 {
        0.0
    } else {
        (std::f64::consts::TAU * x).sin()
    }
}

#[inline]
fn reduce(x: f64) -> f64 {
    // `round` is symmetric about zero, so reduce(−x) = −reduce(x) exactly
    x - x.round()
}

/// J(z) ≈ (1/π)·Σ_{j=1..ℓ} sin(2πjz)/j.
///
/// Each angle is reduced modulo 1 before the sine is taken, so the sum is
/// exactly odd in z and exactly zero at every multiple of ½.
pub fn zigzag_fourier(z: f64, cfg: ZigzagConfig) -> f64 {
    let f = reduce(z);
    if f == 0.0 || f.abs() == 0.5 {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 1..=cfg.terms {
        let j = j as f64;
        sum += sin_2pi_reduced(reduce(j * f)) / j;
    }
    sum / std::f64::consts::PI
}

/// Closed-form sawtooth: [z] − z ± ½ with [·] truncating toward zero, and 0
/// at the integers. Used as a reference for [`zigzag_fourier`].
pub fn zigzag_piecewise(z: f64) -> f64 {
    let t = z.trunc();
    if z == t {
        0.0
    } else if z > 0.0 {
        t - z + 0.5
    } else {
        t - z - 0.5
    }
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
}

/// Lattice jump term (h*/√(2πn))·J((z√n − n·a*)/h*)·e^{−z²/2}.
pub fn lattice_term(n: u64, z: f64, lat: &LatticeSpec, cfg: ZigzagConfig) -> Result<f64> {
    ensure_sample_size(n)?;
    ensure_finite("z", z)?;
    Ok(lattice_term_unchecked(n as f64, z, lat, cfg))
}

/// Snaps x to the nearest multiple of ½ when it is within rounding error of
/// one, so that lattice points and midpoints computed in floating point land
/// exactly on J's jumps and zeros.
fn snap_half(x: f64) -> f64 {
    let h = (2.0 * x).round() / 2.0;
    if (x - h).abs() <= 1e-9 * x.abs().max(1.0) { h } else { x }
}

fn lattice_term_unchecked(n: f64, z: f64, lat: &LatticeSpec, cfg: ZigzagConfig) -> f64 {
    let arg = snap_half((z * n.sqrt() - n * lat.a_star) / lat.h_star);
    lat.h_star / (std::f64::consts::TAU * n).sqrt()
        * zigzag_fourier(arg, cfg)
        * (-0.5 * z * z).exp()
}

/// Φ(z) + A_n(z) + lattice jump term. The query order is ignored: the
/// lattice expansion is only available to O(n^{-1/2}).
pub fn lattice_cdf(
    query: &ApproxQuery,
    ms: &MomentSummary,
    lat: &LatticeSpec,
    cfg: ZigzagConfig,
) -> Result<FormalValue> {
    ensure_sample_size(query.n)?;
    ensure_finite("z", query.point)?;
    if !(lat.h_star > 0.0) {
        return Err(invalid("standardized lattice span must be positive"));
    }
    let a_star = (lat.a - ms.mu) / ms.sigma;
    let h_star = lat.h_max / ms.sigma;
    if !close(a_star, lat.a_star) || !close(h_star, lat.h_star) {
        return Err(Error::Inconsistent(format!(
            "lattice (a*, h*) = ({}, {}) but moments give ({a_star}, {h_star})",
            lat.a_star, lat.h_star
        )));
    }
    let (n, z) = (query.n as f64, query.point);
    let value =
        norm_cdf(z) + a_term(n, z, ms.skewness) + lattice_term_unchecked(n, z, lat, cfg);
    Ok(FormalValue::cdf(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist_model::{compute_moments, minimal_lattice, DistributionSpec};

    fn off_integers(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
        let count = ((hi - lo) / step).round() as usize;
        (0..=count)
            .map(move |i| lo + i as f64 * step)
            .filter(|z| (z - z.round()).abs() > 0.01)
    }

    #[test]
    fn fourier_examples() {
        let cfg = ZigzagConfig::default();
        for k in -6..=6 {
            assert_eq!(zigzag_fourier(k as f64, cfg), 0.0);
            assert!(zigzag_fourier(k as f64 / 2.0, cfg).abs() < 1e-12);
        }
        assert!((zigzag_fourier(0.25, cfg) - 0.25).abs() < 1e-3);
        assert!(ZigzagConfig::new(0).is_err());
    }

    #[test]
    fn piecewise_examples() {
        assert_eq!(zigzag_piecewise(2.75), -0.25);
        assert_eq!(zigzag_piecewise(-0.25), -0.25);
        assert_eq!(zigzag_piecewise(7.0), 0.0);
        assert_eq!(zigzag_piecewise(-7.0), 0.0);
    }

    #[test]
    fn fourier_tracks_piecewise() {
        let cfg = ZigzagConfig::default();
        for z in off_integers(-3.5, 3.5, 0.001) {
            let (f, p) = (zigzag_fourier(z, cfg), zigzag_piecewise(z));
            // tail of the series after Abel summation
            let delta = (z - z.round()).abs();
            let bound = 1.0 / (std::f64::consts::PI * 1001.0 * (std::f64::consts::PI * delta).sin());
            assert!((f - p).abs() <= bound, "z={z}: {f} vs {p}");
            if delta >= 0.03 {
                assert!((f - p).abs() <= 2e-3, "z={z}: {f} vs {p}");
            }
            assert!(f.abs() <= 0.6);
            assert!(p.abs() <= 0.5);
            assert!((zigzag_fourier(z + 1.0, cfg) - f).abs() <= 2e-3);
            assert_eq!(zigzag_fourier(-z, cfg), -f);
        }
    }

    #[test]
    fn two_point_standardization() {
        let p = 18.0 / 38.0;
        let dist = DistributionSpec::two_point(-1.0, 1.0, p).unwrap();
        let ms = compute_moments(&dist).unwrap();
        let lat = minimal_lattice(&dist).unwrap();
        assert!((lat.a_star + 0.948_68).abs() < 1e-5);
        assert!((lat.h_star - 1.0 / (p * (1.0 - p)).sqrt()).abs() < 1e-12);
        assert!((lat.h_star - 2.002_77).abs() < 1e-5);
        let id = MomentSummary::standardized(0.3, None).unwrap();
        let l = standardize_lattice(-2.0, 0.5, &id).unwrap();
        assert_eq!((l.a_star, l.h_star), (-2.0, 0.5));
        assert!(standardize_lattice(0.0, 0.0, &ms).is_err());
    }

    #[test]
    fn shift_invariance() {
        let p = 18.0 / 38.0;
        let dist = DistributionSpec::two_point(-1.0, 1.0, p).unwrap();
        let ms = compute_moments(&dist).unwrap();
        let lat = minimal_lattice(&dist).unwrap();
        let cfg = ZigzagConfig::default();
        for z in [-1.3, -0.2, 0.41, 1.7] {
            let q = ApproxQuery::at_z(7, z, crate::edgeworth::ApproxOrder::OrderSqrtN).unwrap();
            let base = lattice_cdf(&q, &ms, &lat, cfg).unwrap().value;
            for k in -3..=3 {
                let a = lat.a + k as f64 * lat.h_max;
                let shifted = standardize_lattice(a, lat.h_max, &ms).unwrap();
                let v = lattice_cdf(&q, &ms, &shifted, cfg).unwrap().value;
                assert!((v - base).abs() < 1e-9, "k={k}");
            }
        }
    }

    #[test]
    fn inconsistent_lattice_rejected() {
        let dist = DistributionSpec::two_point(-1.0, 1.0, 0.4).unwrap();
        let ms = compute_moments(&dist).unwrap();
        let mut lat = minimal_lattice(&dist).unwrap();
        lat.a_star += 1e-6;
        let q = ApproxQuery::at_z(3, 0.0, crate::edgeworth::ApproxOrder::OrderSqrtN).unwrap();
        assert!(matches!(
            lattice_cdf(&q, &ms, &lat, ZigzagConfig::default()),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn break_even_point_has_no_jump_term() {
        let p = 18.0 / 38.0;
        let dist = DistributionSpec::two_point(-1.0, 1.0, p).unwrap();
        let ms = compute_moments(&dist).unwrap();
        let lat = minimal_lattice(&dist).unwrap();
        for n in 1..=50u64 {
            let z = -ms.mu * (n as f64).sqrt() / ms.sigma;
            let t = lattice_term(n, z, &lat, ZigzagConfig::default()).unwrap();
            assert!(t.abs() < 1e-12, "n={n}: {t}");
        }
    }
}
