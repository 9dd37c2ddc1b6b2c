//! Python module `clt_scope`: moment summaries, Edgeworth and Cornish-Fisher
//! approximations, sample sizing, exact Binomial tails, distances between
//! tabulated functions, the roulette study and seeded simulation.

use std::collections::BTreeMap;

use clt::binomial_exact as binom;
use clt::case_studies::{self as cs, BetSpec, Corrections, SimConfig};
use clt::dist_model::{self as dm, DistributionSpec, MomentSummary};
use clt::distances::{self as dist, FunctionKind, GridFunction};
use clt::edgeworth::{self as ew, ApproxOrder, ApproxQuery};
use clt::lattice_clt::{self as lat, ZigzagConfig};
use clt::sizing_bounds::{self as sb, KurtosisTermForm};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: clt::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for clt::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn order(s: &str) -> PyResult<ApproxOrder> {
    s.parse().py()
}

fn bet(name: &str) -> PyResult<BetSpec> {
    name.parse().py()
}

/// Mean, standard deviation, skewness, excess kurtosis and E|Y*|³ of one
/// observation.
#[pyclass(name = "Moments", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyMoments(MomentSummary);

#[pymethods]
impl PyMoments {
    #[new]
    #[pyo3(signature = (mu, sigma, skewness, excess_kurtosis=None, abs_third_std_moment=None))]
    fn new(
        mu: f64,
        sigma: f64,
        skewness: f64,
        excess_kurtosis: Option<f64>,
        abs_third_std_moment: Option<f64>,
    ) -> PyResult<Self> {
        MomentSummary::new(mu, sigma, skewness, excess_kurtosis, abs_third_std_moment)
            .py()
            .map(Self)
    }

    /// Shape only, with μ = 0 and σ = 1.
    #[staticmethod]
    #[pyo3(signature = (skewness, excess_kurtosis=None))]
    fn standardized(skewness: f64, excess_kurtosis: Option<f64>) -> PyResult<Self> {
        MomentSummary::standardized(skewness, excess_kurtosis).py().map(Self)
    }

    /// Moments of a finite population sampled with replacement.
    #[staticmethod]
    fn of_population(values: Vec<f64>) -> PyResult<Self> {
        let d = DistributionSpec::finite_population(values).py()?;
        dm::compute_moments(&d).py().map(Self)
    }

    #[staticmethod]
    fn of_pmf(support: Vec<f64>, probs: Vec<f64>) -> PyResult<Self> {
        let d = DistributionSpec::finite_pmf(support, probs).py()?;
        dm::compute_moments(&d).py().map(Self)
    }

    /// Moments of the mean of n observations.
    fn of_mean(&self, n: u64) -> PyResult<Self> {
        dm::moments_of_mean(&self.0, n).py().map(Self)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }

    #[getter]
    fn skewness(&self) -> f64 {
        self.0.skewness
    }

    #[getter]
    fn excess_kurtosis(&self) -> Option<f64> {
        self.0.excess_kurtosis
    }

    #[getter]
    fn abs_third_std_moment(&self) -> Option<f64> {
        self.0.abs_third_std_moment
    }

    fn __repr__(&self) -> String {
        let m = &self.0;
        format!(
            "Moments(mu={}, sigma={}, skewness={}, excess_kurtosis={:?}, abs_third_std_moment={:?})",
            m.mu, m.sigma, m.skewness, m.excess_kurtosis, m.abs_third_std_moment
        )
    }
}

/// Returns (value, out_of_range) for the Edgeworth CDF of order "1", "sqrt-n" or "n".
#[pyfunction]
#[pyo3(signature = (moments, n, z, order="n"))]
fn edgeworth_cdf(moments: PyMoments, n: u64, z: f64, order: &str) -> PyResult<(f64, bool)> {
    let q = ApproxQuery::at_z(n, z, self::order(order)?).py()?;
    let v = ew::edgeworth_cdf(&q, &moments.0).py()?;
    Ok((v.value, v.out_of_range))
}

#[pyfunction]
#[pyo3(signature = (moments, n, z, order="n"))]
fn edgeworth_pdf(moments: PyMoments, n: u64, z: f64, order: &str) -> PyResult<(f64, bool)> {
    let q = ApproxQuery::at_z(n, z, self::order(order)?).py()?;
    let v = ew::edgeworth_pdf(&q, &moments.0).py()?;
    Ok((v.value, v.out_of_range))
}

/// Cornish-Fisher quantile of the standardized mean at level p.
#[pyfunction]
#[pyo3(signature = (moments, n, p, order="n"))]
fn cf_quantile(moments: PyMoments, n: u64, p: f64, order: &str) -> PyResult<f64> {
    let q = ApproxQuery::at_p(n, p, self::order(order)?).py()?;
    clt::cornish_fisher::cf_quantile(&q, &moments.0).py()
}

/// Edgeworth CDF plus the lattice term for a discrete law on the given support.
#[pyfunction]
#[pyo3(signature = (support, probs, n, z, terms=1000))]
fn lattice_cdf(support: Vec<f64>, probs: Vec<f64>, n: u64, z: f64, terms: u32) -> PyResult<f64> {
    let d = DistributionSpec::finite_pmf(support, probs).py()?;
    let ms = dm::compute_moments(&d).py()?;
    let spec = dm::minimal_lattice(&d).py()?;
    let q = ApproxQuery::at_z(n, z, ApproxOrder::OrderSqrtN).py()?;
    let cfg = ZigzagConfig::new(terms).py()?;
    Ok(lat::lattice_cdf(&q, &ms, &spec, cfg).py()?.value)
}

/// Truncated Fourier series of the centered zig-zag J.
#[pyfunction]
#[pyo3(signature = (x, terms=1000))]
fn zigzag(x: f64, terms: u32) -> PyResult<f64> {
    Ok(lat::zigzag_fourier(x, ZigzagConfig::new(terms).py()?))
}

/// Smallest n with |A_n(z)| ≤ ε.
#[pyfunction]
fn n3_star(z: f64, epsilon: f64, skewness: f64) -> PyResult<u64> {
    sb::n3_star(z, epsilon, skewness).py()
}

/// Smallest n with |A_n(z) + B_n(z)| ≤ ε; `form` is "he4" or "derivative".
#[pyfunction]
#[pyo3(signature = (z, epsilon, moments, form="he4"))]
fn n34_star(z: f64, epsilon: f64, moments: PyMoments, form: &str) -> PyResult<u64> {
    let form = match form {
        "he4" => KurtosisTermForm::He4Printed,
        "derivative" => KurtosisTermForm::Derivative,
        other => return Err(PyValueError::new_err(format!("unknown kurtosis form `{other}`"))),
    };
    sb::n34_star_with(z, epsilon, &moments.0, form).py()
}

/// Cρ/√n; needs `abs_third_std_moment` on the moments.
#[pyfunction]
#[pyo3(signature = (moments, n, c=None))]
fn berry_esseen_bound(moments: PyMoments, n: u64, c: Option<f64>) -> PyResult<f64> {
    Ok(sb::berry_esseen_bound(&moments.0, n, c).py()?.bound)
}

#[pyfunction]
fn min_n_nonneg_pdf(skewness: f64, z_star: f64) -> PyResult<u64> {
    ew::min_n_nonneg_pdf(skewness, z_star).py()
}

#[pyfunction]
fn binomial_pmf(n: u64, p: f64, k: u64) -> PyResult<f64> {
    binom::binomial_pmf(n, p, k).py()
}

#[pyfunction]
fn binomial_cdf(n: u64, p: f64, k: u64) -> PyResult<f64> {
    binom::binomial_cdf(n, p, k).py()
}

#[pyfunction]
fn binomial_sf(n: u64, p: f64, k: u64) -> PyResult<f64> {
    binom::binomial_sf(n, p, k).py()
}

/// P(gain after n plays > ε) exactly, for "red-or-black" or "single-number".
#[pyfunction]
#[pyo3(signature = (bet, n, epsilon=0.0))]
fn theta_exact(bet: &str, n: u64, epsilon: f64) -> PyResult<f64> {
    cs::theta_exact(&self::bet(bet)?, n, epsilon).py()
}

/// Normal approximation to `theta_exact`; `corrections` is "none", "skew" or "all".
#[pyfunction]
#[pyo3(signature = (bet, n, epsilon=0.0, corrections="all"))]
fn theta_approx(bet: &str, n: u64, epsilon: f64, corrections: &str) -> PyResult<f64> {
    let c = match corrections {
        "none" => Corrections::NONE,
        "skew" => Corrections::SKEW,
        "all" => Corrections::ALL,
        other => return Err(PyValueError::new_err(format!("unknown corrections `{other}`"))),
    };
    cs::theta_approx(&self::bet(bet)?, n, epsilon, c).py()
}

fn grid_pair(kind: &str, grid: Vec<f64>, f: Vec<f64>, g: Vec<f64>) -> PyResult<(GridFunction, GridFunction)> {
    let kind: FunctionKind = kind.parse().py()?;
    Ok((GridFunction::new(kind, grid.clone(), f).py()?, GridFunction::new(kind, grid, g).py()?))
}

/// Distances between two functions tabulated on a shared grid.
///
/// `kind` is "cdf" (ks, wkr) or "pdf" (hellinger, bhattacharyya, kl, js).
/// Returns a dict keyed by metric name.
#[pyfunction]
#[pyo3(signature = (grid, f, g, kind="pdf"))]
fn distances(grid: Vec<f64>, f: Vec<f64>, g: Vec<f64>, kind: &str) -> PyResult<BTreeMap<&'static str, f64>> {
    let (f, g) = grid_pair(kind, grid, f, g)?;
    Ok(BTreeMap::from_iter(match f.kind() {
        FunctionKind::Cdf => vec![
            ("ks", dist::ks_distance(&f, &g).py()?),
            ("wkr", dist::wkr_distance(&f, &g).py()?),
        ],
        FunctionKind::Pdf => {
            let bc = dist::bhattacharyya(&f, &g).py()?;
            vec![
                ("hellinger", dist::hellinger(&f, &g).py()?),
                ("bhattacharyya_coefficient", bc.coefficient),
                ("bhattacharyya_distance", bc.distance),
                ("kl", dist::kl_divergence(&f, &g).py()?.divergence),
                ("js", dist::js_metric(&f, &g).py()?),
            ]
        }
    }))
}

/// M standardized means of n draws; the result does not depend on `chunks`.
#[pyfunction]
#[pyo3(signature = (support, probs, n, replicates, seed, chunks=1))]
fn simulate(
    py: Python<'_>,
    support: Vec<f64>,
    probs: Vec<f64>,
    n: u64,
    replicates: u64,
    seed: u64,
    chunks: usize,
) -> PyResult<Vec<f64>> {
    let d = DistributionSpec::finite_pmf(support, probs).py()?;
    let cfg = SimConfig::new(n, replicates, seed, chunks).py()?;
    py.detach(|| cs::simulate_standardized_means(&d, &cfg)).py()
}

#[pymodule]
fn clt_scope(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMoments>()?;
    m.add_function(wrap_pyfunction!(edgeworth_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(edgeworth_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(cf_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(zigzag, m)?)?;
    m.add_function(wrap_pyfunction!(n3_star, m)?)?;
    m.add_function(wrap_pyfunction!(n34_star, m)?)?;
    m.add_function(wrap_pyfunction!(berry_esseen_bound, m)?)?;
    m.add_function(wrap_pyfunction!(min_n_nonneg_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_sf, m)?)?;
    m.add_function(wrap_pyfunction!(theta_exact, m)?)?;
    m.add_function(wrap_pyfunction!(theta_approx, m)?)?;
    m.add_function(wrap_pyfunction!(distances, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
