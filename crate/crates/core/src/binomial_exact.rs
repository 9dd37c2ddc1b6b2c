//! Exact Binomial probabilities and de Moivre's approximations to them.
//!
//! The PMF uses Loader's saddle-point form, so no factorial or log-gamma of
//! a large argument is ever formed and each term keeps full relative
//! precision for the n in the tens of thousands.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_probability, invalid, Result};
use crate::special_fns::{norm_cdf, norm_pdf};

/// ln(n!) − [½ln(2πn) + n ln n − n] for n = 0..=15.
const STIRLING_ERR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_29,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_09,
    0.016_644_691_189_821_19,
    0.013_876_128_823_070_75,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_1,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

fn stirling_err(n: u64) -> f64 {
    if n < 16 {
        return STIRLING_ERR[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let n = n as f64;
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// x·ln(x/m) + m − x without cancellation when x ≈ m.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

fn ln_pmf_unchecked(n: u64, p: f64, k: u64) -> f64 {
    let q = 1.0 - p;
    if k == 0 {
        return n as f64 * (-p).ln_1p();
    }
    if k == n {
        return n as f64 * p.ln();
    }
    let (nf, kf) = (n as f64, k as f64);
    let lc = stirling_err(n)
        - stirling_err(k)
        - stirling_err(n - k)
        - bd0(kf, nf * p)
        - bd0(nf - kf, nf * q);
    let lf = std::f64::consts::TAU.ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

fn check(n: u64, p: f64, k: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("number of trials must be at least 1"));
    }
    ensure_probability("p", p)?;
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

pub fn binomial_ln_pmf(n: u64, p: f64, k: u64) -> Result<f64> {
    check(n, p, k)?;
    Ok(ln_pmf_unchecked(n, p, k))
}

pub fn binomial_pmf(n: u64, p: f64, k: u64) -> Result<f64> {
    check(n, p, k)?;
    Ok(ln_pmf_unchecked(n, p, k).exp())
}

/// Neumaier-compensated sum of PMF terms over lo..=hi.
fn pmf_sum(n: u64, p: f64, lo: u64, hi: u64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in lo..=hi {
        let x = ln_pmf_unchecked(n, p, k).exp();
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

/// P(S ≤ k) for S ~ Binomial(n, p).
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> Result<f64> {
    check(n, p, k)?;
    if k == n {
        return Ok(1.0);
    }
    // sum the shorter-mass side and complement the other
    if (k as f64) < n as f64 * p {
        Ok(pmf_sum(n, p, 0, k))
    } else {
        Ok(1.0 - pmf_sum(n, p, k + 1, n))
    }
}

/// P(S > k).
pub fn binomial_sf(n: u64, p: f64, k: u64) -> Result<f64> {
    check(n, p, k)?;
    if k == n {
        return Ok(0.0);
    }
    if (k as f64) < n as f64 * p {
        Ok(1.0 - pmf_sum(n, p, 0, k))
    } else {
        Ok(pmf_sum(n, p, k + 1, n))
    }
}

/// P(|S_n − np| ≤ d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralProbQuery {
    pub n: u64,
    pub p: f64,
    pub d: u64,
}

impl CentralProbQuery {
    pub fn new(n: u64, p: f64, d: u64) -> Result<Self> {
        check(n, p, 0)?;
        let reach = (n as f64 * p).max(n as f64 * (1.0 - p));
        if d as f64 > reach.ceil() {
            return Err(invalid(format!("d = {d} exceeds max(np, n(1 − p)) = {reach}")));
        }
        Ok(Self { n, p, d })
    }

    /// Center of the window, and whether np had to be floored to get it.
    fn center(&self) -> (u64, bool) {
        let np = self.n as f64 * self.p;
        let r = np.round();
        if (np - r).abs() <= 1e-9 * np.max(1.0) {
            (r as u64, false)
        } else {
            (np.floor() as u64, true)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralProb {
    pub prob: f64,
    /// Set when np is not an integer and the window was centered at ⌊np⌋.
    pub floor_anchored: bool,
}

/// Σ_{s=a}^{b} P(S_n = s) with a = max(0, np − d), b = min(np + d, n).
pub fn central_binomial_prob(q: &CentralProbQuery) -> CentralProb {
    let (c, floor_anchored) = q.center();
    let lo = c.saturating_sub(q.d);
    let hi = (c + q.d).min(q.n);
    let prob = if lo == 0 && hi == q.n {
        1.0
    } else {
        pmf_sum(q.n, q.p, lo, hi).min(1.0)
    };
    CentralProb { prob, floor_anchored }
}

/// Φ(z) − Φ(−z) with z = d/√(np(1−p)), or (d + ½)/√(np(1−p)) with the
/// continuity correction.
pub fn de_moivre_central_approx(q: &CentralProbQuery, continuity_correction: bool) -> f64 {
    let sd = (q.n as f64 * q.p * (1.0 - q.p)).sqrt();
    let d = q.d as f64 + if continuity_correction { 0.5 } else { 0.0 };
    1.0 - 2.0 * norm_cdf(-d / sd)
}

/// ½ln(2πn) + n·ln(n) − n.
pub fn stirling_ln_factorial(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("Stirling's formula needs n ≥ 1"));
    }
    let n = n as f64;
    Ok(0.5 * (std::f64::consts::TAU * n).ln() + n * n.ln() - n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeMoivreForm {
    /// 1/√(πm)·exp(−d²/m) for n = 2m, p = ½, s = m + d.
    Symmetric,
    /// exp[−d²/(2np(1−p))]/√(2πnp(1−p)) with d = s − np.
    General,
    /// φ((s − np)/√(np(1−p))), which approximates √(np(1−p))·P(S = s).
    Standardized,
    /// de Moivre's large-sample expression for ln P(S = s).
    Log,
}

impl std::str::FromStr for DeMoivreForm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Self::Symmetric),
            "general" => Ok(Self::General),
            "standardized" => Ok(Self::Standardized),
            "log" => Ok(Self::Log),
            other => Err(invalid(format!(
                "unknown form `{other}` (expected symmetric, general, standardized or log)"
            ))),
        }
    }
}

pub fn de_moivre_pmf_approx(n: u64, p: f64, s: u64, form: DeMoivreForm) -> Result<f64> {
    check(n, p, s)?;
    let (nf, sf) = (n as f64, s as f64);
    let var = nf * p * (1.0 - p);
    match form {
        DeMoivreForm::Symmetric => {
            if p != 0.5 || n % 2 != 0 {
                return Err(invalid("the symmetric form needs p = ½ and an even n"));
            }
            let m = nf / 2.0;
            let d = sf - m;
            Ok((-d * d / m).exp() / (std::f64::consts::PI * m).sqrt())
        }
        DeMoivreForm::General => {
            let d = sf - nf * p;
            Ok((-d * d / (2.0 * var)).exp() / (std::f64::consts::TAU * var).sqrt())
        }
        DeMoivreForm::Standardized => Ok(norm_pdf((sf - nf * p) / var.sqrt())),
        DeMoivreForm::Log => {
            if s < 2 {
                return Err(invalid("the logarithmic form needs s ≥ 2 (it contains ln(s − 1))"));
            }
            Ok((nf + 0.5) * nf.ln() + sf * p.ln() + (nf - sf) * (1.0 - p).ln()
                - 0.5 * std::f64::consts::TAU.ln()
                - sf.ln()
                - (sf - 0.5) * (sf - 1.0).ln()
                - (nf - sf + 0.5) * (nf - sf + 1.0).ln())
        }
    }
}

/// One row of the exact-versus-approximate central probability table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralProbRow {
    pub d: u64,
    pub exact: f64,
    pub approx_no_cc: f64,
    pub approx_cc: f64,
}

pub fn central_prob_table(n: u64, p: f64, d_max: u64) -> Result<Vec<CentralProbRow>> {
    (0..=d_max)
        .map(|d| {
            let q = CentralProbQuery::new(n, p, d)?;
            Ok(CentralProbRow {
                d,
                exact: central_binomial_prob(&q).prob,
                approx_no_cc: de_moivre_central_approx(&q, false),
                approx_cc: de_moivre_central_approx(&q, true),
            })
        })
        .collect()
}
