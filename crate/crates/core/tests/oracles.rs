use clt_scope::binomial_exact::binomial_cdf;
use clt_scope::case_studies::BetSpec;
use clt_scope::dist_model::{compute_moments, DistributionSpec, MomentSummary};
use clt_scope::distances::{ks_distance, uniform_grid, GridFunction};
use clt_scope::edgeworth::{edgeworth_cdf, edgeworth_pdf, ApproxOrder, ApproxQuery};
use clt_scope::lattice_clt::{lattice_cdf, ZigzagConfig};
use clt_scope::sizing_bounds::{berry_esseen_bound, esseen_constant, esseen_extremal};
use clt_scope::special_fns::norm_cdf;
use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

/// Atoms of Z_n for a two-point law: (z_k, P(Z_n ≤ z_k)) for k = 0..=n wins.
fn two_point_steps(v1: f64, v2: f64, p: f64, n: u64) -> Vec<(f64, f64)> {
    let ms = compute_moments(&DistributionSpec::two_point(v1, v2, p).unwrap()).unwrap();
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let s = v1 * (nf - k as f64) + v2 * k as f64;
            ((s - nf * ms.mu) / (ms.sigma * nf.sqrt()), binomial_cdf(n, p, k).unwrap())
        })
        .collect()
}

/// sup_z |F_n(z) − Φ(z)|, attained at a jump from one side or the other.
fn exact_sup_error(steps: &[(f64, f64)]) -> f64 {
    let mut prev = 0.0;
    let mut worst: f64 = 0.0;
    for &(z, c) in steps {
        let phi = norm_cdf(z);
        worst = worst.max((c - phi).abs()).max((prev - phi).abs());
        prev = c;
    }
    worst
}

#[test]
fn berry_esseen_dominates_symmetric_coin() {
    let ms = compute_moments(&DistributionSpec::two_point(-1.0, 1.0, 0.5).unwrap()).unwrap();
    for n in 1..=64 {
        let bound = berry_esseen_bound(&ms, n, None).unwrap().bound;
        let err = exact_sup_error(&two_point_steps(-1.0, 1.0, 0.5, n));
        assert!(err <= bound, "n={n}: {err} > {bound}");
    }
}

#[test]
fn esseen_extremal_ratio_approaches_constant() {
    // √n·sup|F_n − Φ|/ρ for the extremal law tends to the Esseen constant
    let d = esseen_extremal(1.0).unwrap();
    let ms = compute_moments(&d).unwrap();
    let DistributionSpec::FinitePmf { support, probs } = &d else { panic!("two atoms expected") };
    let rho = ms.abs_third_std_moment.unwrap();
    let n = 4000;
    let steps = two_point_steps(support[0], support[1], probs[1], n);
    let ratio = exact_sup_error(&steps) * (n as f64).sqrt() / rho;
    assert!((ratio - esseen_constant()).abs() < 0.01, "{ratio}");
}

#[test]
fn ks_to_normal_shrinks_for_single_number() {
    let bet = BetSpec::single_number();
    let mut last = f64::INFINITY;
    for n in [5u64, 25, 100, 400] {
        let jumps: Vec<(f64, f64)> =
            two_point_steps(bet.v1, bet.v2, bet.p, n).into_iter().filter(|&(z, _)| z < 40.0).collect();
        let exact = GridFunction::step_cdf(&jumps, -10.0, 40.0).unwrap();
        let mut grid = uniform_grid(-10.0, 40.0, 5001);
        grid.extend(jumps.iter().map(|j| j.0));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let normal = GridFunction::tabulate(clt_scope::distances::FunctionKind::Cdf, grid, norm_cdf).unwrap();
        let ks = ks_distance(&exact, &normal).unwrap();
        assert!(ks < last, "n={n}: {ks} not below {last}");
        last = ks;
    }
}

/// Largest |approx − exact| at the midpoints of the jumps of a two-point
/// mean, where a continuous approximation should sit.
fn midpoint_error(bet: &BetSpec, n: u64, approx: impl Fn(f64) -> f64) -> f64 {
    let steps = two_point_steps(bet.v1, bet.v2, bet.p, n);
    let mut prev = 0.0;
    let mut worst: f64 = 0.0;
    for &(z, c) in &steps {
        if z.abs() <= 3.0 {
            worst = worst.max((approx(z) - 0.5 * (prev + c)).abs());
        }
        prev = c;
    }
    worst
}

#[test]
fn lattice_correction_improves_with_n() {
    let bet = BetSpec::single_number();
    let (ms, lat) = (bet.moments(), bet.lattice());
    let full = |n: u64| {
        move |z: f64| {
            let q = ApproxQuery::at_z(n, z, ApproxOrder::OrderSqrtN).unwrap();
            lattice_cdf(&q, &ms, &lat, ZigzagConfig::default()).unwrap().value
        }
    };
    let e5 = midpoint_error(&bet, 5, full(5));
    let e100 = midpoint_error(&bet, 100, full(100));
    let o1_100 = midpoint_error(&bet, 100, norm_cdf);
    assert!(e100 < e5, "{e100} vs {e5}");
    assert!(e100 < o1_100, "{e100} vs {o1_100}");
}

/// Exact law of the standardized mean of n Exponential(1) draws.
fn gamma_oracle(n: u64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let nf = n as f64;
    let g = Gamma::new(nf, 1.0).unwrap();
    let g2 = g;
    (move |z: f64| g.cdf(nf + z * nf.sqrt()), move |z: f64| nf.sqrt() * g2.pdf(nf + z * nf.sqrt()))
}

#[test]
fn edgeworth_tracks_gamma_better_with_each_order() {
    let ms = MomentSummary::standardized(2.0, Some(6.0)).unwrap();
    let zs: Vec<f64> = (0..=450).map(|i| -1.5 + 0.01 * i as f64).collect();
    for n in [16u64, 64] {
        let (cdf, pdf) = gamma_oracle(n);
        let sup = |order, density: bool| {
            zs.iter()
                .map(|&z| {
                    let q = ApproxQuery::at_z(n, z, order).unwrap();
                    if density {
                        (edgeworth_pdf(&q, &ms).unwrap().value - pdf(z)).abs()
                    } else {
                        (edgeworth_cdf(&q, &ms).unwrap().value - cdf(z)).abs()
                    }
                })
                .fold(0.0, f64::max)
        };
        for density in [false, true] {
            let errs: Vec<f64> = ApproxOrder::ALL.iter().map(|&o| sup(o, density)).collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "n={n} density={density}: {errs:?}");
        }
    }
}
