//! One function per subcommand, each returning the tables to emit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use clt_scope::binomial_exact::{binomial_cdf, binomial_sf, central_prob_table};
use clt_scope::case_studies::{
    env_thread_cap, income_pipeline, roulette_sweep, simulate_standardized_means, single_play_facts,
    surrogate_population, BetSpec, IncomeConfig, SimConfig, SortedSample, SurrogateMixture,
};
use clt_scope::case_studies::income::SimSettings;
use clt_scope::cornish_fisher::cf_quantile_curve;
use clt_scope::dist_model::{
    compute_moments, load_population_csv, minimal_lattice, moments_of_mean, naive_sample_size, CsvOptions,
    DistributionSpec, MomentSummary,
};
use clt_scope::distances::{
    bhattacharyya, default_grid, hellinger, js_metric, ks_distance, kl_divergence, wkr_distance, FunctionKind,
    GridFunction,
};
use clt_scope::edgeworth::{edgeworth_cdf, edgeworth_pdf, min_n_nonneg_pdf, ApproxOrder, ApproxQuery};
use clt_scope::lattice_clt::{lattice_cdf, lattice_term, zigzag_fourier, zigzag_piecewise, ZigzagConfig};
use clt_scope::sizing_bounds::{
    berry_esseen_bound, n34_star_with, n3_max, n3_star, wlln_sizes, KurtosisTermForm,
};
use clt_scope::special_fns::{norm_cdf, norm_pdf, norm_quantile, norm_sf};

use crate::args::*;
use crate::output::{format_float, Cell, Table};

/// Failure of a subcommand: bad flag combinations (exit 2) or a
/// computation that could not be carried out (exit 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl From<clt_scope::Error> for CliError {
    fn from(e: clt_scope::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Compute(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// The tables plus the seed to record in the provenance header.
pub struct Outcome {
    pub tables: Vec<Table>,
    pub seed: Option<u64>,
}

impl From<Vec<Table>> for Outcome {
    fn from(tables: Vec<Table>) -> Self {
        Self { tables, seed: None }
    }
}

fn bet_spec(name: BetName) -> BetSpec {
    match name {
        BetName::RedOrBlack => BetSpec::red_or_black(),
        BetName::SingleNumber => BetSpec::single_number(),
    }
}

fn load_population(path: &Path, header: bool) -> CliResult<Vec<f64>> {
    let values = load_population_csv(path, CsvOptions { has_header: header })
        .map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?;
    Ok(values)
}

/// Checks that at most one source is named; the distribution itself is
/// built later, once all flags have been validated.
fn dist_source_count(d: &DistArgs) -> usize {
    [d.input.is_some(), d.two_point.is_some(), d.support.is_some(), d.bet.is_some(), d.surrogate]
        .iter()
        .filter(|&&b| b)
        .count()
}

fn check_dist(d: &DistArgs, required: bool) -> CliResult<()> {
    match dist_source_count(d) {
        0 if required => usage(
            "no distribution given: use one of --input, --two-point, --support/--probs, --bet or --surrogate",
        ),
        0 | 1 => {
            if let (Some(s), Some(p)) = (&d.support, &d.probs) {
                if s.len() != p.len() {
                    return usage(format!("--support has {} values but --probs has {}", s.len(), p.len()));
                }
            }
            Ok(())
        }
        _ => usage("give only one of --input, --two-point, --support/--probs, --bet or --surrogate"),
    }
}

fn build_dist(d: &DistArgs) -> CliResult<DistributionSpec> {
    Ok(if let Some(path) = &d.input {
        DistributionSpec::finite_population(load_population(path, d.header)?)?
    } else if let Some(tp) = d.two_point {
        DistributionSpec::two_point(tp.v1, tp.v2, tp.p)?
    } else if let (Some(s), Some(p)) = (&d.support, &d.probs) {
        DistributionSpec::finite_pmf(s.clone(), p.clone())?
    } else if let Some(b) = d.bet {
        bet_spec(b).distribution()
    } else {
        DistributionSpec::finite_population(surrogate_population(&SurrogateMixture::default())?)?
    })
}

fn check_shape(s: &ShapeArgs) -> CliResult<()> {
    if s.lambda.is_some() {
        if dist_source_count(&s.dist) > 0 {
            return usage("give either --lambda/--eta or a distribution, not both");
        }
        Ok(())
    } else {
        check_dist(&s.dist, true)
    }
}

fn build_shape(s: &ShapeArgs) -> CliResult<MomentSummary> {
    match s.lambda {
        Some(l) => Ok(MomentSummary::standardized(l, s.eta)?),
        None => Ok(compute_moments(&build_dist(&s.dist)?)?),
    }
}

fn check_grid(g: &GridArgs) -> CliResult<()> {
    if g.z.is_none() {
        if g.z_min > g.z_max {
            return usage(format!("--z-min {} exceeds --z-max {}", g.z_min, g.z_max));
        }
        if (g.z_max - g.z_min) / g.z_step > 1e6 {
            return usage("z grid would have more than a million points");
        }
    }
    Ok(())
}

fn grid_points(g: &GridArgs) -> Vec<f64> {
    match &g.z {
        Some(z) => z.clone(),
        None => {
            let steps = ((g.z_max - g.z_min) / g.z_step + 1e-9).floor() as usize;
            (0..=steps).map(|i| g.z_min + g.z_step * i as f64).collect()
        }
    }
}

fn check_increasing(flag: &str, v: &[f64]) -> CliResult<()> {
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return usage(format!("{flag} values must be strictly increasing"));
    }
    Ok(())
}

/// Worker count for Monte Carlo: the requested chunk count, or the number
/// of cores, capped by the environment.
fn worker_chunks(requested: Option<u32>) -> CliResult<usize> {
    let cap = env_thread_cap().map_err(|e| CliError::Usage(e.to_string()))?;
    let base = requested
        .map(|c| c as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok(cap.map_or(base, |c| base.min(c)).max(1))
}

fn moment_row(n: u64, ms: &MomentSummary) -> Vec<Cell> {
    vec![
        n.into(),
        ms.mu.into(),
        ms.sigma.into(),
        ms.skewness.into(),
        ms.excess_kurtosis.into(),
        ms.abs_third_std_moment.into(),
    ]
}

const MOMENT_COLUMNS: [(&str, &str); 6] = [
    ("n", "observations averaged (1 = the distribution itself)"),
    ("mu", "mean, observation units"),
    ("sigma", "standard deviation, observation units"),
    ("skewness", "third standardized central moment"),
    ("excess_kurtosis", "fourth standardized central moment minus 3"),
    ("rho", "E|(Y - mu)/sigma|^3"),
];

pub fn moments(a: &MomentsArgs) -> CliResult<Outcome> {
    check_dist(&a.dist, true)?;
    let dist = build_dist(&a.dist)?;
    let ms = compute_moments(&dist)?;
    let mut t = Table::new("moments", &MOMENT_COLUMNS);
    t.push(moment_row(1, &ms));
    for &n in &a.n {
        t.push(moment_row(n, &moments_of_mean(&ms, n)?));
    }
    let mut tables = vec![t];
    if !matches!(dist, DistributionSpec::FinitePopulation { .. }) {
        if let Ok(lat) = minimal_lattice(&dist) {
            let mut l = Table::new(
                "lattice",
                &[
                    ("a", "a support point, observation units"),
                    ("h_max", "maximal span, observation units"),
                    ("a_star", "(a - mu)/sigma"),
                    ("h_star", "h_max/sigma"),
                ],
            );
            l.push(vec![lat.a.into(), lat.h_max.into(), lat.a_star.into(), lat.h_star.into()]);
            tables.push(l);
        }
    }
    if let (Some(ds), Some(dk)) = (a.delta_s, a.delta_ek) {
        let mut t = Table::new(
            "naive_sample_size",
            &[
                ("delta_s", "skewness tolerance for the mean"),
                ("delta_ek", "excess kurtosis tolerance for the mean"),
                ("n", "smallest n meeting both tolerances"),
            ],
        );
        t.push(vec![ds.into(), dk.into(), naive_sample_size(&ms, ds, dk)?.into()]);
        tables.push(t);
    }
    Ok(tables.into())
}

pub fn edgeworth(a: &EdgeworthArgs) -> CliResult<Outcome> {
    check_shape(&a.shape)?;
    check_grid(&a.grid)?;
    let ms = build_shape(&a.shape)?;
    let with_kurtosis = ms.excess_kurtosis.is_some();
    let (name, normal_doc): (&str, &str) = match a.kind {
        Kind::Cdf => ("edgeworth_cdf", "Phi(z)"),
        Kind::Pdf => ("edgeworth_pdf", "phi(z)"),
    };
    let mut t = Table::new(
        name,
        &[
            ("n", "sample size"),
            ("z", "standardized point"),
            ("normal", normal_doc),
            ("order_sqrt_n", "with the O(n^-1/2) skewness term"),
            ("order_n", "with the O(n^-1) terms as well (needs excess kurtosis)"),
            ("out_of_range", "a corrected value left the range of a CDF or density"),
        ],
    );
    for &n in &a.n {
        for z in grid_points(&a.grid) {
            let eval = |order| -> CliResult<_> {
                let q = ApproxQuery::at_z(n, z, order)?;
                Ok(match a.kind {
                    Kind::Cdf => edgeworth_cdf(&q, &ms)?,
                    Kind::Pdf => edgeworth_pdf(&q, &ms)?,
                })
            };
            let o1 = eval(ApproxOrder::Order1)?;
            let half = eval(ApproxOrder::OrderSqrtN)?;
            let full = if with_kurtosis { Some(eval(ApproxOrder::OrderN)?) } else { None };
            let out = half.out_of_range || full.is_some_and(|f| f.out_of_range);
            t.push(vec![n.into(), z.into(), o1.value.into(), half.value.into(), full.map(|f| f.value).into(), out.into()]);
        }
    }
    Ok(vec![t].into())
}

pub fn cornish_fisher(a: &CornishFisherArgs) -> CliResult<Outcome> {
    check_shape(&a.shape)?;
    check_increasing("--p", &a.p)?;
    let ms = build_shape(&a.shape)?;
    let with_kurtosis = ms.excess_kurtosis.is_some();
    let mut t = Table::new(
        "cornish_fisher",
        &[
            ("n", "sample size"),
            ("p", "probability level"),
            ("normal", "Phi^-1(p)"),
            ("cf_sqrt_n", "quantile with the O(n^-1/2) term"),
            ("cf_n", "quantile with the O(n^-1) terms as well (needs excess kurtosis)"),
        ],
    );
    let mut mono = Table::new(
        "monotonicity",
        &[
            ("n", "sample size"),
            ("sqrt_n_non_monotone", "O(n^-1/2) quantiles fail to increase along the levels"),
            ("n_non_monotone", "O(n^-1) quantiles fail to increase along the levels"),
        ],
    );
    for &n in &a.n {
        let half = cf_quantile_curve(n, &a.p, ApproxOrder::OrderSqrtN, &ms)?;
        let full = if with_kurtosis { Some(cf_quantile_curve(n, &a.p, ApproxOrder::OrderN, &ms)?) } else { None };
        for (i, &p) in a.p.iter().enumerate() {
            t.push(vec![
                n.into(),
                p.into(),
                norm_quantile(p).into(),
                half.values[i].into(),
                full.as_ref().map(|c| c.values[i]).into(),
            ]);
        }
        mono.push(vec![n.into(), half.non_monotone.into(), full.map(|c| c.non_monotone).into()]);
    }
    Ok(vec![t, mono].into())
}

/// P(Z_n ≤ z) for the mean of n draws from a two-point law.
fn two_point_exact_cdf(v1: f64, v2: f64, p: f64, n: u64, z: f64) -> CliResult<f64> {
    let ms = compute_moments(&DistributionSpec::two_point(v1, v2, p)?)?;
    let nf = n as f64;
    let s = nf * ms.mu + z * ms.sigma * nf.sqrt();
    let mut t = (s - nf * v1) / (v2 - v1);
    if (t - t.round()).abs() <= 1e-9 * t.abs().max(1.0) {
        t = t.round();
    }
    Ok(if v2 > v1 {
        if t < 0.0 {
            0.0
        } else if t >= nf {
            1.0
        } else {
            binomial_cdf(n, p, t.floor() as u64)?
        }
    } else {
        // S ≤ s means at least ⌈t⌉ draws of v2
        let k = t.ceil();
        if k <= 0.0 {
            1.0
        } else if k > nf {
            0.0
        } else {
            binomial_sf(n, p, k as u64 - 1)?
        }
    })
}

pub fn lattice(a: &LatticeArgs) -> CliResult<Outcome> {
    check_grid(&a.grid)?;
    let cfg = ZigzagConfig::new(a.terms)?;
    if a.zigzag {
        if dist_source_count(&a.dist) > 0 {
            return usage("--zigzag tabulates J alone and takes no distribution");
        }
        let mut t = Table::new(
            "zigzag",
            &[
                ("x", "argument"),
                ("fourier", "truncated Fourier series of J"),
                ("piecewise", "closed form of J"),
            ],
        );
        for x in grid_points(&a.grid) {
            t.push(vec![x.into(), zigzag_fourier(x, cfg).into(), zigzag_piecewise(x).into()]);
        }
        return Ok(vec![t].into());
    }
    check_dist(&a.dist, true)?;
    let dist = build_dist(&a.dist)?;
    let ms = compute_moments(&dist)?;
    let lat = minimal_lattice(&dist)?;
    let exact_law = match dist {
        DistributionSpec::TwoPoint { v1, v2, p } => Some((v1, v2, p)),
        _ => None,
    };
    let mut t = Table::new(
        "lattice_cdf",
        &[
            ("n", "sample size"),
            ("z", "standardized point"),
            ("normal", "Phi(z)"),
            ("skew", "Phi(z) + A_n(z)"),
            ("lattice_term", "zig-zag jump correction"),
            ("skew_lattice", "Phi(z) + A_n(z) + lattice term"),
            ("exact", "exact P(Z_n <= z), two-point laws only"),
        ],
    );
    for &n in &a.n {
        for z in grid_points(&a.grid) {
            let q = ApproxQuery::at_z(n, z, ApproxOrder::OrderSqrtN)?;
            let skew = edgeworth_cdf(&q, &ms)?.value;
            let exact = match exact_law {
                Some((v1, v2, p)) => Some(two_point_exact_cdf(v1, v2, p, n, z)?),
                None => None,
            };
            t.push(vec![
                n.into(),
                z.into(),
                norm_cdf(z).into(),
                skew.into(),
                lattice_term(n, z, &lat, cfg)?.into(),
                lattice_cdf(&q, &ms, &lat, cfg)?.value.into(),
                exact.into(),
            ]);
        }
    }
    Ok(vec![t].into())
}

fn level_tag(q: f64) -> String {
    format_float(q, 17)
}

pub fn sample_size(a: &SampleSizeArgs) -> CliResult<Outcome> {
    let form = match a.kurtosis_form {
        KurtosisForm::He4 => KurtosisTermForm::He4Printed,
        KurtosisForm::Derivative => KurtosisTermForm::Derivative,
    };
    let shape = MomentSummary::new(0.0, 1.0, a.lambda, a.eta, a.rho)?;
    let mut cols: Vec<(String, String)> = vec![("epsilon".into(), "target CDF error".into())];
    for &q in &a.z_quantiles {
        let tag = level_tag(q);
        cols.push((format!("n3_{tag}"), format!("skewness-only sample size at z = Phi^-1({tag})")));
        cols.push((format!("n34_{tag}"), format!("skewness and kurtosis sample size at z = Phi^-1({tag})")));
    }
    let mut sizing = Table { name: "sizing".into(), columns: cols, rows: Vec::new() };
    let mut worst = Table::new(
        "n3_max",
        &[("epsilon", "target CDF error"), ("n3_max", "skewness-only sample size at the worst z")],
    );
    for &eps in &a.eps {
        let mut row: Vec<Cell> = vec![eps.into()];
        for &q in &a.z_quantiles {
            let z = norm_quantile(q);
            row.push(n3_star(z, eps, a.lambda)?.into());
            row.push(match a.eta {
                Some(_) => n34_star_with(z, eps, &shape, form)?.into(),
                None => Cell::Empty,
            });
        }
        sizing.push(row);
        worst.push(vec![eps.into(), n3_max(a.lambda, eps)?.into()]);
    }
    let mut tables = vec![sizing, worst];
    if let Some(z) = a.nonneg_z {
        let mut t = Table::new(
            "nonneg_density",
            &[
                ("skewness", "skewness of one observation"),
                ("z_star", "left edge of the region"),
                ("n", "smallest n whose O(n^-1/2) density is non-negative on z >= z_star"),
            ],
        );
        t.push(vec![a.lambda.into(), z.into(), min_n_nonneg_pdf(a.lambda, z)?.into()]);
        tables.push(t);
    }
    if a.rho.is_some() {
        let mut t = Table::new(
            "berry_esseen",
            &[
                ("n", "sample size"),
                ("c", "Berry-Esseen constant"),
                ("rho", "absolute third standardized moment"),
                ("bound", "C rho / sqrt(n)"),
            ],
        );
        for &n in &a.be_n {
            let b = berry_esseen_bound(&shape, n, a.be_c)?;
            t.push(vec![b.n.into(), b.c.into(), b.rho.into(), b.bound.into()]);
        }
        tables.push(t);
    }
    if let (Some(p), Some(hw), Some(prob)) = (a.wlln_p, a.wlln_half_width, a.wlln_prob) {
        let w = wlln_sizes(p, hw, prob)?;
        let mut t = Table::new(
            "wlln",
            &[
                ("p", "true proportion"),
                ("half_width", "allowed deviation of the sample proportion"),
                ("prob", "required coverage"),
                ("clt", "sample size from the Normal approximation"),
                ("chebyshev", "sample size from Chebyshev's inequality"),
            ],
        );
        t.push(vec![p.into(), hw.into(), prob.into(), w.clt.into(), w.chebyshev.into()]);
        tables.push(t);
    }
    Ok(tables.into())
}

fn read_grid_function(path: &Path) -> CliResult<GridFunction> {
    let file = File::open(path).map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?;
    GridFunction::read_csv(BufReader::new(file)).map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))
}

fn cdf_metrics(f: &GridFunction, g: &GridFunction, t: &mut Table) -> CliResult<()> {
    t.push(vec!["ks".into(), ks_distance(f, g)?.into()]);
    t.push(vec!["wkr".into(), wkr_distance(f, g)?.into()]);
    Ok(())
}

fn pdf_metrics(f: &GridFunction, g: &GridFunction, t: &mut Table) -> CliResult<()> {
    let bc = bhattacharyya(f, g)?;
    let kl = kl_divergence(f, g)?;
    t.push(vec!["bhattacharyya_coefficient".into(), bc.coefficient.into()]);
    t.push(vec!["bhattacharyya_distance".into(), bc.distance.into()]);
    t.push(vec!["hellinger".into(), hellinger(f, g)?.into()]);
    t.push(vec!["kl_divergence".into(), kl.divergence.into()]);
    t.push(vec!["cross_entropy".into(), kl.cross_entropy.into()]);
    t.push(vec!["differential_entropy".into(), kl.differential_entropy.into()]);
    t.push(vec!["js".into(), js_metric(f, g)?.into()]);
    Ok(())
}

pub fn distances(a: &DistancesArgs) -> CliResult<Outcome> {
    let mut t = Table::new("distances", &[("metric", "distance or divergence"), ("value", "value")]);
    match (&a.left, &a.right, a.normal_shift) {
        (Some(l), Some(r), None) => {
            let (f, g) = (read_grid_function(l)?, read_grid_function(r)?);
            if f.kind() != g.kind() {
                return Err(CliError::Compute(format!(
                    "--left is a {} table but --right is a {} table",
                    f.kind(),
                    g.kind()
                )));
            }
            match f.kind() {
                FunctionKind::Cdf => cdf_metrics(&f, &g, &mut t)?,
                FunctionKind::Pdf => pdf_metrics(&f, &g, &mut t)?,
            }
        }
        (None, None, Some(d)) => {
            let grid = default_grid();
            let tab = |kind, f: &dyn Fn(f64) -> f64| GridFunction::tabulate(kind, grid.clone(), f);
            let f = tab(FunctionKind::Cdf, &norm_cdf)?;
            let g = tab(FunctionKind::Cdf, &|x| norm_cdf(x - d))?;
            cdf_metrics(&f, &g, &mut t)?;
            let f = tab(FunctionKind::Pdf, &norm_pdf)?;
            let g = tab(FunctionKind::Pdf, &|x| norm_pdf(x - d))?;
            pdf_metrics(&f, &g, &mut t)?;
        }
        _ => return usage("give --left and --right, or --normal-shift"),
    }
    Ok(vec![t].into())
}

pub fn demoivre_table(a: &DemoivreArgs) -> CliResult<Outcome> {
    let mut t = Table::new(
        "central_binomial",
        &[
            ("d", "half-width around the mean"),
            ("exact", "exact P(|S - np| <= d)"),
            ("approx_no_cc", "Normal approximation without continuity correction"),
            ("approx_cc", "Normal approximation with continuity correction"),
        ],
    );
    for r in central_prob_table(a.n, a.p, a.d_max)? {
        t.push(vec![r.d.into(), r.exact.into(), r.approx_no_cc.into(), r.approx_cc.into()]);
    }
    Ok(vec![t].into())
}

pub fn roulette(a: &RouletteArgs) -> CliResult<Outcome> {
    let ns: Vec<u64> = match &a.n {
        Some(ns) => ns.clone(),
        None => {
            if a.n_min > a.n_max {
                return usage(format!("--n-min {} exceeds --n-max {}", a.n_min, a.n_max));
            }
            (a.n_min..=a.n_max).step_by(a.n_step as usize).collect()
        }
    };
    let bet = match a.two_point {
        Some(tp) => BetSpec::new("custom", tp.v1, tp.v2, tp.p)?,
        None => bet_spec(a.bet),
    };
    let mut cols = vec![
        ("n", "number of plays"),
        ("theta_exact", "exact P(net gain > epsilon)"),
        ("theta_o1", "Normal approximation"),
    ];
    if a.corrections != CorrectionSet::None {
        cols.push(("theta_skew", "with the skewness correction"));
    }
    if a.corrections == CorrectionSet::All {
        cols.push(("theta_skew_lattice", "with skewness and lattice corrections"));
    }
    let mut t = Table::new("theta", &cols);
    for r in roulette_sweep(&bet, ns, a.epsilon)? {
        let mut row: Vec<Cell> = vec![r.n.into(), r.theta_exact.into(), r.theta_o1.into()];
        if a.corrections != CorrectionSet::None {
            row.push(r.theta_skew.into());
        }
        if a.corrections == CorrectionSet::All {
            row.push(r.theta_skew_lattice.into());
        }
        t.push(row);
    }
    let mut tables = vec![t];
    if !a.facts_n.is_empty() {
        let mut f = Table::new(
            "facts",
            &[
                ("n", "number of plays"),
                ("expected_net_gain_per_play", "monetary units"),
                ("expected_house_take", "monetary units over n plays"),
                ("most_likely_net_gain", "net gain of the most probable outcome"),
                ("most_likely_outcome_prob", "its probability"),
                ("prob_net_plus_one", "P(net gain = +1)"),
            ],
        );
        for &n in &a.facts_n {
            let s = single_play_facts(&bet, n)?;
            f.push(vec![
                s.n.into(),
                s.expected_net_gain_per_play.into(),
                s.expected_house_take.into(),
                s.most_likely_net_gain.into(),
                s.most_likely_outcome_prob.into(),
                s.prob_net_plus_one.into(),
            ]);
        }
        tables.push(f);
    }
    Ok(tables.into())
}

pub fn simulate(a: &SimulateArgs) -> CliResult<Outcome> {
    check_dist(&a.dist, true)?;
    let chunks = worker_chunks(a.sim.chunks)?;
    let dist = build_dist(&a.dist)?;
    let ms = compute_moments(&dist)?;
    let cfg = SimConfig::new(a.n, a.sim.replicates, a.sim.seed, chunks)?;
    let draws = simulate_standardized_means(&dist, &cfg)?;
    if let Some(path) = &a.samples {
        let mut w = BufWriter::new(File::create(path)?);
        for x in &draws {
            writeln!(w, "{}", format_float(*x, 17))?;
        }
        w.flush()?;
    }
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
    let skew = draws.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / m / var.powf(1.5);
    let mut summary = Table::new(
        "summary",
        &[
            ("n", "observations per mean"),
            ("replicates", "number of simulated means"),
            ("mean", "sample mean of Z_n"),
            ("sd", "sample standard deviation of Z_n"),
            ("skewness", "sample skewness of Z_n"),
            ("skewness_theory", "population skewness / sqrt(n)"),
        ],
    );
    summary.push(vec![
        a.n.into(),
        a.sim.replicates.into(),
        mean.into(),
        var.sqrt().into(),
        skew.into(),
        (ms.skewness / (a.n as f64).sqrt()).into(),
    ]);
    let sample = SortedSample::new(draws)?;
    let mut q = Table::new(
        "quantiles",
        &[
            ("p", "probability level"),
            ("value", "empirical quantile, left-continuous inverse"),
            ("std_error", "Monte Carlo standard error from order statistics"),
            ("normal", "Phi^-1(p)"),
        ],
    );
    for &p in &a.quantiles {
        let e = sample.quantile_with_se(p)?;
        q.push(vec![p.into(), e.value.into(), e.std_error.into(), norm_quantile(p).into()]);
    }
    let mut tables = vec![summary, q];
    if !a.tail_z.is_empty() {
        let mut t = Table::new(
            "tails",
            &[("z", "threshold"), ("fraction", "share of means above z"), ("normal", "1 - Phi(z)")],
        );
        for &z in &a.tail_z {
            t.push(vec![z.into(), sample.tail_fraction(z).into(), norm_sf(z).into()]);
        }
        tables.push(t);
    }
    Ok(Outcome { tables, seed: Some(a.sim.seed) })
}

pub fn income(a: &IncomeArgs) -> CliResult<Outcome> {
    check_grid(&a.grid)?;
    let chunks = if a.track { worker_chunks(a.sim.chunks)? } else { 1 };
    let population = match &a.input {
        Some(path) => load_population(path, a.header)?,
        None => surrogate_population(&SurrogateMixture::default())?,
    };
    let cfg = IncomeConfig {
        n_list: a.n.clone(),
        epsilons: a.eps.clone(),
        quantiles: a.z_quantiles.clone(),
        z_star: a.z_star,
        forced_shape: a.lambda.zip(a.eta),
        z_grid: grid_points(&a.grid),
        track_ns: a.track_n.clone(),
        track_p: a.track_p,
        sim: a.track.then_some(SimSettings {
            replicates: a.sim.replicates,
            seed: a.sim.seed,
            parallel_chunks: chunks,
        }),
    };
    let r = income_pipeline(&population, &cfg)?;

    let mut m = Table::new(
        "moments",
        &[
            ("population_size", "units in the population"),
            ("mu", "mean income"),
            ("sigma", "standard deviation"),
            ("skewness", "population skewness"),
            ("excess_kurtosis", "population excess kurtosis"),
            ("rho", "E|(Y - mu)/sigma|^3"),
            ("skewness_used", "skewness used by the analytic tables"),
            ("excess_kurtosis_used", "excess kurtosis used by the analytic tables"),
        ],
    );
    m.push(vec![
        r.population_size.into(),
        r.moments.mu.into(),
        r.moments.sigma.into(),
        r.moments.skewness.into(),
        r.moments.excess_kurtosis.into(),
        r.moments.abs_third_std_moment.into(),
        r.skewness_used.into(),
        r.excess_kurtosis_used.into(),
    ]);

    let mut cols: Vec<(String, String)> = vec![("epsilon".into(), "target CDF error".into())];
    for &q in &a.z_quantiles {
        let tag = level_tag(q);
        cols.push((format!("n3_{tag}"), format!("skewness-only sample size at z = Phi^-1({tag})")));
        cols.push((format!("n34_{tag}"), format!("skewness and kurtosis sample size at z = Phi^-1({tag})")));
    }
    let mut sizing = Table { name: "sizing".into(), columns: cols, rows: Vec::new() };
    for row in r.sizing.chunks(a.z_quantiles.len()) {
        let mut cells: Vec<Cell> = vec![row[0].epsilon.into()];
        for c in row {
            cells.push(c.n3.into());
            cells.push(c.n34.into());
        }
        sizing.push(cells);
    }

    let mut tables = vec![m, sizing];
    if let Some(nn) = r.non_negative_density {
        let mut t = Table::new(
            "nonneg_density",
            &[
                ("skewness", "skewness used"),
                ("z_star", "left edge of the region"),
                ("n", "smallest n whose O(n^-1/2) density is non-negative on z >= z_star"),
            ],
        );
        t.push(vec![nn.skewness.into(), nn.z_star.into(), nn.n.into()]);
        tables.push(t);
    }

    let mut cols: Vec<(String, String)> = vec![("z".into(), "standardized point".into())];
    for c in &r.a_curves {
        cols.push((format!("a_{}", c.n), format!("skewness correction A_n(z) at n = {}", c.n)));
    }
    let mut curves = Table { name: "a_curves".into(), columns: cols, rows: Vec::new() };
    for (i, &z) in r.z_grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![z.into()];
        row.extend(r.a_curves.iter().map(|c| Cell::from(c.a[i])));
        curves.push(row);
    }
    tables.push(curves);

    let mut surface = Table::new(
        "error_surface",
        &[
            ("n", "sample size"),
            ("z", "standardized point"),
            ("e_star", "|A_n + B_n| with the derivative form of B_n"),
            ("e_star_he4", "|A_n + B_n| with the He4 form of B_n"),
        ],
    );
    for e in &r.error_surface {
        surface.push(vec![e.n.into(), e.z.into(), e.e_star.into(), e.e_star_he4.into()]);
    }
    tables.push(surface);

    if let Some(track) = &r.quantile_track {
        let mut t = Table::new(
            "quantile_track",
            &[
                ("n", "sample size"),
                ("p", "probability level"),
                ("normal", "Phi^-1(p)"),
                ("cf_sqrt_n", "Cornish-Fisher quantile, O(n^-1/2)"),
                ("cf_n", "Cornish-Fisher quantile, O(n^-1)"),
                ("empirical", "Monte Carlo quantile of Z_n"),
                ("std_error", "Monte Carlo standard error"),
                ("z_score", "(cf_n - empirical)/std_error"),
            ],
        );
        for q in track {
            t.push(vec![
                q.n.into(),
                q.p.into(),
                q.normal.into(),
                q.cf_sqrt_n.into(),
                q.cf_n.into(),
                q.empirical.into(),
                q.std_error.into(),
                q.z_score.into(),
            ]);
        }
        tables.push(t);
    }
    Ok(Outcome { tables, seed: a.track.then_some(a.sim.seed) })
}
