//! Sampling distributions, their moment summaries, the moments of the
//! standardized mean, and minimal-lattice detection for discrete supports.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_sample_size, invalid, Error, Result};

/// Tolerance used when checking that probabilities sum to one.
const PROB_SUM_TOL: f64 = 1e-12;
/// Largest denominator accepted when snapping support points to rationals.
const MAX_DENOMINATOR: i128 = 1_000_000;
/// Relative tolerance for the rational snap. Every real lies within 1/q² of
/// some p/q, so with q up to 10⁶ the tolerance must sit well below 1e−12 for
/// irrational supports to be rejected.
const RATIONAL_TOL: f64 = 1e-13;

/// Cumulant fingerprint of a sampling distribution.
///
/// `mu` and `sigma` are in observation units; `skewness` (λ), `excess_kurtosis`
/// (η) and `abs_third_std_moment` (ρ = E|(Y−μ)/σ|³) are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mu: f64,
    pub sigma: f64,
    pub skewness: f64,
    pub excess_kurtosis: Option<f64>,
    pub abs_third_std_moment: Option<f64>,
}

impl MomentSummary {
    pub fn new(
        mu: f64,
        sigma: f64,
        skewness: f64,
        excess_kurtosis: Option<f64>,
        abs_third_std_moment: Option<f64>,
    ) -> Result<Self> {
        ensure_finite("mu", mu)?;
        ensure_finite("skewness", skewness)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        if let Some(eta) = excess_kurtosis {
            ensure_finite("excess_kurtosis", eta)?;
            // Pearson: kurtosis ≥ skewness² + 1
            let bound = skewness * skewness - 2.0;
            if eta < bound - 1e-9 * bound.abs().max(1.0) {
                return Err(invalid(format!(
                    "excess kurtosis {eta} violates the feasibility bound λ² − 2 = {bound}"
                )));
            }
        }
        if let Some(rho) = abs_third_std_moment {
            ensure_finite("abs_third_std_moment", rho)?;
            if rho < skewness.abs() - 1e-12 * rho.max(1.0) {
                return Err(invalid(format!(
                    "absolute third moment {rho} is below |skewness| {}",
                    skewness.abs()
                )));
            }
        }
        Ok(Self {
            mu,
            sigma,
            skewness,
            excess_kurtosis,
            abs_third_std_moment,
        })
    }

    /// Standardized shape only: μ = 0, σ = 1.
    pub fn standardized(skewness: f64, excess_kurtosis: Option<f64>) -> Result<Self> {
        Self::new(0.0, 1.0, skewness, excess_kurtosis, None)
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn require_kurtosis(&self) -> Result<f64> {
        self.excess_kurtosis
            .ok_or(Error::MissingMoment("excess kurtosis η"))
    }

    pub fn require_rho(&self) -> Result<f64> {
        self.abs_third_std_moment
            .ok_or(Error::MissingMoment("absolute third standardized moment ρ"))
    }
}

/// A sampling distribution for a single observation Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Finite population sampled uniformly with replacement.
    FinitePopulation { values: Vec<f64> },
    /// Explicit PMF on a strictly increasing support.
    FinitePmf { support: Vec<f64>, probs: Vec<f64> },
    /// Two-point law with P(Y = v2) = p.
    TwoPoint { v1: f64, v2: f64, p: f64 },
}

impl DistributionSpec {
    pub fn finite_population(values: Vec<f64>) -> Result<Self> {
        let spec = Self::FinitePopulation { values };
        spec.validate()?;
        Ok(spec)
    }

    pub fn finite_pmf(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let spec = Self::FinitePmf { support, probs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn two_point(v1: f64, v2: f64, p: f64) -> Result<Self> {
        let spec = Self::TwoPoint { v1, v2, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::FinitePopulation { values } => {
                if values.is_empty() {
                    return Err(invalid("finite population is empty"));
                }
                if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                    return Err(invalid(format!("population value {bad} is not finite")));
                }
                let first = values[0];
                if values.iter().all(|&v| v == first) {
                    return Err(Error::Degenerate(
                        "finite population needs at least two distinct values".into(),
                    ));
                }
            }
            Self::FinitePmf { support, probs } => {
                if support.is_empty() {
                    return Err(invalid("PMF support is empty"));
                }
                if support.len() != probs.len() {
                    return Err(invalid(format!(
                        "support has {} points but {} probabilities were given",
                        support.len(),
                        probs.len()
                    )));
                }
                if support.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("PMF support must be finite"));
                }
                if support.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("PMF support must be strictly increasing"));
                }
                if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    return Err(invalid("PMF probabilities must be non-negative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(invalid(format!("PMF probabilities sum to {total}, not 1")));
                }
            }
            Self::TwoPoint { v1, v2, p } => {
                ensure_finite("v1", *v1)?;
                ensure_finite("v2", *v2)?;
                if v1 >= v2 {
                    return Err(invalid(format!("two-point law needs v1 < v2, got {v1} ≥ {v2}")));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(invalid(format!("two-point probability must lie in (0, 1), got {p}")));
                }
            }
        }
        Ok(())
    }

    /// Atoms with their probabilities. A finite population becomes a uniform
    /// PMF over its listed values (duplicates kept as separate atoms).
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::FinitePopulation { values } => {
                let w = 1.0 / values.len() as f64;
                values.iter().map(|&v| (v, w)).collect()
            }
            Self::FinitePmf { support, probs } => {
                support.iter().copied().zip(probs.iter().copied()).collect()
            }
            Self::TwoPoint { v1, v2, p } => vec![(*v1, 1.0 - p), (*v2, *p)],
        }
    }
}

/// Population moments (divide by N) of a distribution.
pub fn compute_moments(dist: &DistributionSpec) -> Result<MomentSummary> {
    dist.validate()?;
    let atoms = dist.atoms();
    let mu: f64 = atoms.iter().map(|(y, p)| p * y).sum();
    let var: f64 = atoms.iter().map(|(y, p)| p * (y - mu).powi(2)).sum();
    if !(var > 0.0) {
        return Err(Error::Degenerate("variance is zero".into()));
    }
    let sigma = var.sqrt();
    let (mut m3, mut m4, mut abs3) = (0.0, 0.0, 0.0);
    for &(y, p) in &atoms {
        let s = (y - mu) / sigma;
        let s3 = s * s * s;
        m3 += p * s3;
        m4 += p * s3 * s;
        abs3 += p * s3.abs();
    }
    // the two-point law sits exactly on the feasibility boundary; clamp roundoff
    let eta = (m4 - 3.0).max(m3 * m3 - 2.0);
    Ok(MomentSummary {
        mu,
        sigma,
        skewness: m3,
        excess_kurtosis: Some(eta),
        abs_third_std_moment: Some(abs3.max(m3.abs())),
    })
}

/// Moments of the sample mean Ȳ_n: σ/√n, λ/√n, η/n.
pub fn moments_of_mean(ms: &MomentSummary, n: u64) -> Result<MomentSummary> {
    ensure_sample_size(n)?;
    let root_n = (n as f64).sqrt();
    Ok(MomentSummary {
        mu: ms.mu,
        sigma: ms.sigma / root_n,
        skewness: ms.skewness / root_n,
        excess_kurtosis: ms.excess_kurtosis.map(|eta| eta / n as f64),
        abs_third_std_moment: None,
    })
}

/// Smallest n whose mean has |skewness| ≤ Δ_S and |excess kurtosis| ≤ Δ_EK.
pub fn naive_sample_size(ms: &MomentSummary, delta_s: f64, delta_ek: f64) -> Result<u64> {
    if !(delta_s > 0.0 && delta_ek > 0.0) {
        return Err(invalid("skewness and kurtosis targets must be positive"));
    }
    let eta = ms.require_kurtosis()?;
    let need = (ms.skewness / delta_s).powi(2).max((eta / delta_ek).abs());
    Ok(ceil_at_least_one(need))
}

pub(crate) fn ceil_at_least_one(x: f64) -> u64 {
    if x.is_nan() || x <= 1.0 {
        1
    } else {
        x.ceil() as u64
    }
}

/// Minimal lattice {a + k·h_max} of a discrete distribution, in raw and
/// standardized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub a: f64,
    pub h_max: f64,
    pub a_star: f64,
    pub h_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    fn new(num: i128, den: i128) -> Self {
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Self {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    fn sub(self, other: Self) -> Self {
        Self::new(
            self.num * other.den - other.num * self.den,
            self.den * other.den,
        )
    }

    /// gcd of two non-negative rationals: gcd(a/b, c/d) = gcd(ad, cb)/(bd).
    fn gcd(self, other: Self) -> Self {
        Self::new(
            gcd(self.num * other.den, other.num * self.den),
            self.den * other.den,
        )
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Best rational approximation with denominator ≤ `MAX_DENOMINATOR`, by
/// continued-fraction convergents.
fn snap_rational(x: f64) -> Option<Rational> {
    if !x.is_finite() || x.abs() > 1e15 {
        return None;
    }
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let (h_next, k_next) = (a as i128 * h + h_prev, a as i128 * k + k_prev);
        if k_next > MAX_DENOMINATOR {
            break;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        let approx = Rational::new(h, k);
        if (approx.to_f64() - x).abs() <= RATIONAL_TOL * x.abs().max(1.0) {
            return Some(approx);
        }
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// a* = (a − μ)/σ, h* = h_max/σ.
pub fn standardize_lattice(a: f64, h_max: f64, ms: &MomentSummary) -> Result<LatticeSpec> {
    ensure_finite("a", a)?;
    if !(h_max > 0.0 && h_max.is_finite()) {
        return Err(invalid(format!("lattice span must be positive, got {h_max}")));
    }
    if !(ms.sigma > 0.0) {
        return Err(invalid("sigma must be positive"));
    }
    Ok(LatticeSpec {
        a,
        h_max,
        a_star: (a - ms.mu) / ms.sigma,
        h_star: h_max / ms.sigma,
    })
}

/// Minimal lattice of a PMF or two-point law. Support points are snapped to
/// rationals (denominator ≤ 10⁶, relative tolerance 1e−13) and the span is the gcd of
/// the gaps.
pub fn minimal_lattice(dist: &DistributionSpec) -> Result<LatticeSpec> {
    let support: Vec<f64> = match dist {
        DistributionSpec::FinitePopulation { .. } => return Err(Error::LatticeUndefined),
        DistributionSpec::FinitePmf { support, probs } => {
            dist.validate()?;
            // atoms with zero mass do not belong to the support
            support
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .map(|(&v, _)| v)
                .collect()
        }
        DistributionSpec::TwoPoint { v1, v2, .. } => {
            dist.validate()?;
            vec![*v1, *v2]
        }
    };
    let ms = compute_moments(dist)?;
    if support.len() < 2 {
        return Err(Error::Degenerate("support has a single point".into()));
    }
    let rationals = support
        .iter()
        .map(|&v| {
            snap_rational(v).ok_or_else(|| {
                Error::NonLattice(format!("{v} is not a rational with denominator ≤ 10⁶"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = rationals[0];
    let span = rationals[1..]
        .iter()
        .map(|r| r.sub(base))
        .fold(Rational::new(0, 1), |acc, gap| acc.gcd(gap));
    standardize_lattice(support[0], span.to_f64(), &ms)
}

/// Options for reading a one-column population CSV.
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub has_header: bool,
}

/// Reads a single numeric column. Blank lines are skipped; any other
/// malformed row is reported with its 1-based line number.
pub fn read_population_csv<R: Read>(reader: R, opts: CsvOptions) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected one column, found {}", record.len()),
            });
        }
        let field = &record[0];
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{field}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("`{field}` is not finite"),
            });
        }
        values.push(v);
    }
    Ok(values)
}

pub fn load_population_csv(path: impl AsRef<Path>, opts: CsvOptions) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_population_csv(file, opts)
}
