//! Sample sizes that make the CDF-scale error of the Normal approximation
//! smaller than a target ε, plus Berry–Esseen bounds.

use serde::{Deserialize, Serialize};

use crate::dist_model::{ceil_at_least_one, DistributionSpec, MomentSummary};
use crate::error::{ensure_finite, ensure_probability, ensure_sample_size, invalid, Result};
use crate::special_fns::{norm_cdf, norm_quantile};

/// Best known universal Berry–Esseen constant.
pub const BERRY_ESSEEN_C: f64 = 0.4748;

/// Esseen's lower bound on C, attained by the extremal two-point family.
pub fn esseen_constant() -> f64 {
    (3.0 + 10f64.sqrt()) / (6.0 * std::f64::consts::TAU.sqrt())
}

fn ensure_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, 0.5), got {epsilon}")))
    }
}

/// g(z) = [e^{−z²/2}(z² − 1)]².
pub fn g_of_z(z: f64) -> f64 {
    let v = (-0.5 * z * z).exp() * (z * z - 1.0);
    v * v
}

/// Smallest n with |A_n(z)| ≤ ε.
pub fn n3_star(z: f64, epsilon: f64, skewness: f64) -> Result<u64> {
    ensure_finite("z", z)?;
    ensure_finite("skewness", skewness)?;
    ensure_epsilon(epsilon)?;
    let pi = std::f64::consts::PI;
    Ok(ceil_at_least_one(
        skewness * skewness * g_of_z(z) / (72.0 * pi * epsilon * epsilon),
    ))
}

/// Worst case of [`n3_star`] over z, attained at z = 0.
pub fn n3_max(skewness: f64, epsilon: f64) -> Result<u64> {
    n3_star(0.0, epsilon, skewness)
}

/// Which closed form of the O(n⁻¹) CDF term feeds the quartic.
///
/// `He4Printed` uses 3η(z⁴ − 6z² + 3) for the kurtosis part, the form from
/// which the commonly quoted n₃₄* tables were produced. `Derivative` uses the
/// term that is consistent with the density expansion,
/// −[3η·He₃(z) + λ²·He₅(z)].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KurtosisTermForm {
    #[default]
    He4Printed,
    Derivative,
}

/// |A_n(z) + B_n(z)| = ε written in s = √n as ε² = U²((Vs + W)/s²)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticProblem {
    pub epsilon: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl QuarticProblem {
    pub fn new(epsilon: f64, u: f64, v: f64, w: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(invalid(format!("U must lie in (0, 1], got {u}")));
        }
        ensure_finite("V", v)?;
        ensure_finite("W", w)?;
        Ok(Self { epsilon, u, v, w })
    }

    /// Coefficients at z for the given skewness and excess kurtosis.
    pub fn at(z: f64, epsilon: f64, skewness: f64, excess_kurtosis: f64, form: KurtosisTermForm) -> Result<Self> {
        ensure_finite("z", z)?;
        let root_2pi = std::f64::consts::TAU.sqrt();
        let z2 = z * z;
        let he5 = z * (z2 * z2 - 10.0 * z2 + 15.0);
        let l2 = skewness * skewness;
        let w = match form {
            KurtosisTermForm::He4Printed => {
                3.0 * excess_kurtosis * (z2 * z2 - 6.0 * z2 + 3.0) - l2 * he5
            }
            KurtosisTermForm::Derivative => {
                -(3.0 * excess_kurtosis * z * (z2 - 3.0) + l2 * he5)
            }
        } / (72.0 * root_2pi);
        let v = -skewness * (z2 - 1.0) / (6.0 * root_2pi);
        Self::new(epsilon, (-0.5 * z2).exp(), v, w)
    }

    /// h(s) = (ε/U)²s⁴ − V²s² − 2VWs − W².
    pub fn residual(&self, s: f64) -> f64 {
        let r = self.epsilon / self.u;
        r * r * s.powi(4) - self.v * self.v * s * s - 2.0 * self.v * self.w * s - self.w * self.w
    }
}

/// Real roots of h(s), found by splitting h into (ε/U)s² = ±(Vs + W):
/// s = [UV ± √U·√(UV² + 4Wε)]/(2ε) and s = [−UV ± √U·√(UV² − 4Wε)]/(2ε).
/// Complex pairs are dropped; roots come back sorted and with multiplicity.
pub fn ferrari_roots(prob: &QuarticProblem) -> Vec<f64> {
    let QuarticProblem { epsilon, u, v, w } = *prob;
    let uv = u * v;
    let mut roots = Vec::with_capacity(4);
    for (sign, disc) in [(1.0, u * v * v + 4.0 * w * epsilon), (-1.0, u * v * v - 4.0 * w * epsilon)] {
        if disc < 0.0 {
            continue;
        }
        let r = u.sqrt() * disc.sqrt();
        roots.push((sign * uv + r) / (2.0 * epsilon));
        roots.push((sign * uv - r) / (2.0 * epsilon));
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Largest-magnitude real root s₃₄ of the quartic and n₃₄* = ⌈s₃₄²⌉.
pub fn n34_star(z: f64, epsilon: f64, ms: &MomentSummary) -> Result<u64> {
    n34_star_with(z, epsilon, ms, KurtosisTermForm::default())
}

pub fn n34_star_with(z: f64, epsilon: f64, ms: &MomentSummary, form: KurtosisTermForm) -> Result<u64> {
    ensure_epsilon(epsilon)?;
    let eta = ms.require_kurtosis()?;
    let prob = QuarticProblem::at(z, epsilon, ms.skewness, eta, form)?;
    let s = ferrari_roots(&prob).into_iter().map(f64::abs).fold(0.0, f64::max);
    Ok(ceil_at_least_one(s * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenBound {
    pub c: f64,
    pub rho: f64,
    pub n: u64,
    pub bound: f64,
}

/// sup_z |F_{Z_n}(z) − Φ(z)| ≤ Cρ/√n, with C defaulting to [`BERRY_ESSEEN_C`].
pub fn berry_esseen_bound(ms: &MomentSummary, n: u64, c: Option<f64>) -> Result<BerryEsseenBound> {
    ensure_sample_size(n)?;
    let rho = ms.require_rho()?;
    let c = c.unwrap_or(BERRY_ESSEEN_C);
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("Berry–Esseen constant must be positive, got {c}")));
    }
    Ok(BerryEsseenBound { c, rho, n, bound: c * rho / (n as f64).sqrt() })
}

/// Esseen's extremal two-point law with lattice span h.
pub fn esseen_extremal(h: f64) -> Result<DistributionSpec> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("span must be positive, got {h}")));
    }
    let r = 10f64.sqrt();
    DistributionSpec::finite_pmf(
        vec![-h * (4.0 - r) / 2.0, h * (r - 2.0) / 2.0],
        vec![(r - 2.0) / 2.0, (4.0 - r) / 2.0],
    )
}

/// Sample sizes for P(|p̂ − p| ≤ half_width) ≥ target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WllnSizes {
    /// Normal approximation.
    pub clt: u64,
    /// Chebyshev's inequality.
    pub chebyshev: u64,
}

/// Smallest n with 2Φ(half_width·√n/√(p(1−p))) − 1 ≥ target.
pub fn wlln_clt_n(p: f64, half_width: f64, target_prob: f64) -> Result<u64> {
    Ok(wlln_sizes(p, half_width, target_prob)?.clt)
}

pub fn wlln_sizes(p: f64, half_width: f64, target_prob: f64) -> Result<WllnSizes> {
    ensure_probability("p", p)?;
    ensure_probability("target probability", target_prob)?;
    if !(half_width > 0.0 && half_width < p.min(1.0 - p)) {
        return Err(invalid(format!(
            "half-width must lie in (0, min(p, 1 − p)), got {half_width}"
        )));
    }
    let var = p * (1.0 - p);
    let z = norm_quantile((1.0 + target_prob) / 2.0);
    let mut clt = ceil_at_least_one((z * var.sqrt() / half_width).powi(2));
    // guard against the closed form landing one off through rounding
    let covered = |n: u64| 2.0 * norm_cdf(half_width * (n as f64).sqrt() / var.sqrt()) - 1.0 >= target_prob;
    while clt > 1 && covered(clt - 1) {
        clt -= 1;
    }
    while !covered(clt) {
        clt += 1;
    }
    let cheb = var / (half_width * half_width * (1.0 - target_prob));
    // the quotient is often integral up to rounding noise
    let cheb = if (cheb - cheb.round()).abs() < 1e-9 * cheb { cheb.round() } else { cheb };
    Ok(WllnSizes { clt, chebyshev: ceil_at_least_one(cheb) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist_model::compute_moments;

    fn income() -> MomentSummary {
        MomentSummary::standardized(5.070, Some(33.81)).unwrap()
    }

    /// All sign changes of h on a fine grid, refined by bisection.
    fn bisection_roots(prob: &QuarticProblem) -> Vec<f64> {
        let (lo, hi, steps) = (-1e6f64, 1e6f64, 2_000_000usize);
        let h = |s| prob.residual(s);
        let mut out = Vec::new();
        let dx = (hi - lo) / steps as f64;
        let mut a = lo;
        for i in 1..=steps {
            let b = lo + i as f64 * dx;
            if h(a) == 0.0 {
                out.push(a);
            } else if h(a).signum() != h(b).signum() && h(b) != 0.0 {
                let (mut x, mut y) = (a, b);
                for _ in 0..200 {
                    let m = 0.5 * (x + y);
                    if h(m).signum() == h(x).signum() { x = m } else { y = m }
                }
                out.push(0.5 * (x + y));
            }
            a = b;
        }
        out
    }

    #[test]
    fn g_anchors() {
        assert_eq!(g_of_z(0.0), 1.0);
        assert_eq!(g_of_z(1.0), 0.0);
        assert_eq!(g_of_z(-1.0), 0.0);
        assert!((g_of_z(3.29) - 0.0019).abs() < 1e-4);
        assert!((g_of_z(-3.29) - 0.0019).abs() < 1e-4);
    }

    #[test]
    fn n3_examples() {
        assert!((n3_star(1.960, 0.005, 5.070).unwrap() as i64 - 788).abs() <= 1);
        let z = norm_quantile(0.9995);
        assert!((n3_star(z, 0.0005, 5.070).unwrap() as i64 - 872).abs() <= 1);
        // rounding z to 3.291 moves g(z) enough to lose two units
        assert_eq!(n3_star(3.291, 0.0005, 5.070).unwrap(), 870);
        assert_eq!(n3_star(0.3, 0.01, 0.0).unwrap(), 1);
        assert_eq!(n3_max(5.07, 0.005).unwrap(), 4546);
        assert_eq!(n3_max(0.0, 0.005).unwrap(), 1);
        for eps in [0.3, 0.01, 0.002] {
            for l in [0.5, 2.0, 7.0] {
                assert_eq!(n3_max(l, eps).unwrap(), n3_star(0.0, eps, l).unwrap());
            }
        }
        assert!(n3_star(0.0, 0.0, 1.0).is_err());
        assert!(n3_star(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn ferrari_special_cases() {
        let p = QuarticProblem::new(0.01, 0.8, 0.3, 0.0).unwrap();
        let r = ferrari_roots(&p);
        assert_eq!(r.len(), 4);
        let top = 0.8 * 0.3 / 0.01;
        assert!((r[3] - top).abs() < 1e-9 && (r[0] + top).abs() < 1e-9);
        assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        assert!(p.residual(top).abs() < 1e-8 * top.powi(4));

        let p = QuarticProblem::new(0.01, 0.6, 0.0, -0.2).unwrap();
        let r = ferrari_roots(&p);
        assert_eq!(r.len(), 2);
        let s = (0.6 * 0.2 / 0.01f64).sqrt();
        assert!((r[0] + s).abs() < 1e-12 && (r[1] - s).abs() < 1e-12);
    }

    #[test]
    fn income_quartic_at_zero_has_four_roots() {
        let p = QuarticProblem::at(0.0, 0.005, 5.07, 33.81, KurtosisTermForm::He4Printed).unwrap();
        let r = ferrari_roots(&p);
        assert_eq!(r.len(), 4);
        for s in r {
            assert!(p.residual(s).abs() <= 1e-8 * s.powi(4).max(1.0));
        }
        let p = QuarticProblem::at(1.0, 0.005, 5.07, 33.81, KurtosisTermForm::He4Printed).unwrap();
        assert_eq!(ferrari_roots(&p).len(), 2);
    }

    #[test]
    fn ferrari_matches_bisection() {
        for &(z, eps) in &[(0.0, 0.005), (1.96, 0.01), (2.576, 0.001), (0.5, 0.05)] {
            for form in [KurtosisTermForm::He4Printed, KurtosisTermForm::Derivative] {
                let p = QuarticProblem::at(z, eps, 5.07, 33.81, form).unwrap();
                let mut closed = ferrari_roots(&p);
                closed.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
                let mut grid = bisection_roots(&p);
                grid.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
                // double roots touch zero without a sign change
                let simple: Vec<f64> = closed
                    .iter()
                    .copied()
                    .filter(|&s| grid.iter().any(|g| (g - s).abs() < 1e-6))
                    .collect();
                assert_eq!(simple.len(), grid.len(), "z={z} eps={eps}: {closed:?} vs {grid:?}");
            }
        }
    }

    #[test]
    fn n34_examples() {
        let within = |got: u64, want: f64| ((got as f64 - want) / want).abs() <= 0.01;
        assert!(within(n34_star(1.960, 0.005, &income()).unwrap(), 821.0));
        assert!(within(n34_star(2.576, 0.001, &income()).unwrap(), 5219.0));
        let normal = MomentSummary::standardized(0.0, Some(0.0)).unwrap();
        assert_eq!(n34_star(1.0, 0.01, &normal).unwrap(), 1);
        let no_eta = MomentSummary::standardized(1.0, None).unwrap();
        assert!(n34_star(1.0, 0.01, &no_eta).is_err());
    }

    #[test]
    fn berry_esseen_examples() {
        let pm1 = compute_moments(&DistributionSpec::two_point(-1.0, 1.0, 0.5).unwrap()).unwrap();
        let b = berry_esseen_bound(&pm1, 100, None).unwrap();
        assert!((b.bound - 0.04748).abs() < 1e-12);
        let b4 = berry_esseen_bound(&pm1, 400, None).unwrap();
        assert_eq!(b4.bound, b.bound / 2.0);
        assert!((esseen_constant() - 0.40973).abs() < 1e-4);
        let no_rho = MomentSummary::standardized(0.0, None).unwrap();
        assert!(berry_esseen_bound(&no_rho, 4, None).is_err());
    }

    #[test]
    fn extremal_family() {
        for h in [0.5, 1.0, 2.0] {
            let d = esseen_extremal(h).unwrap();
            let atoms = d.atoms();
            let mass: f64 = atoms.iter().map(|a| a.1).sum();
            let mean: f64 = atoms.iter().map(|a| a.0 * a.1).sum();
            assert!((mass - 1.0).abs() < 1e-12);
            assert!(mean.abs() < 1e-12);
        }
        let atoms = esseen_extremal(1.0).unwrap().atoms();
        assert!((atoms[0].0 + 0.41886).abs() < 1e-5 && (atoms[1].0 - 0.58114).abs() < 1e-5);
        assert!((atoms[0].1 - 0.58114).abs() < 1e-5 && (atoms[1].1 - 0.41886).abs() < 1e-5);
        assert!(esseen_extremal(0.0).is_err());
    }

    #[test]
    fn wlln_examples() {
        let s = wlln_sizes(0.6, 0.02, 1000.0 / 1001.0).unwrap();
        assert_eq!(s.clt, 6498);
        assert_eq!(s.chebyshev, 600_600);
        assert_eq!(wlln_clt_n(0.6, 0.02, 1e-9).unwrap(), 1);
        assert!(wlln_clt_n(0.6, 0.5, 0.9).is_err());
    }
}
