//! Repeated identical roulette bets: the probability θ_n(ε) that the net
//! gain after n plays exceeds ε, exactly and by Edgeworth approximation.

use serde::{Deserialize, Serialize};

use crate::binomial_exact::{binomial_pmf, binomial_sf};
use crate::dist_model::{compute_moments, minimal_lattice, DistributionSpec, LatticeSpec, MomentSummary};
use crate::edgeworth::a_term;
use crate::error::{ensure_finite, ensure_sample_size, invalid, Result};
use crate::lattice_clt::{lattice_term, ZigzagConfig};
use crate::special_fns::norm_sf;

/// A bet paying net `v2` with probability `p` and net `v1` otherwise, in
/// monetary units per play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetSpec {
    pub name: String,
    pub v1: f64,
    pub v2: f64,
    pub p: f64,
}

impl BetSpec {
    pub fn new(name: impl Into<String>, v1: f64, v2: f64, p: f64) -> Result<Self> {
        DistributionSpec::two_point(v1, v2, p)?;
        Ok(Self { name: name.into(), v1, v2, p })
    }

    /// Even-money bet on red or black in American roulette.
    pub fn red_or_black() -> Self {
        Self { name: "red-or-black".into(), v1: -1.0, v2: 1.0, p: 18.0 / 38.0 }
    }

    /// 35-to-1 bet on a single number in American roulette.
    pub fn single_number() -> Self {
        Self { name: "single-number".into(), v1: -1.0, v2: 35.0, p: 1.0 / 38.0 }
    }

    pub fn distribution(&self) -> DistributionSpec {
        DistributionSpec::TwoPoint { v1: self.v1, v2: self.v2, p: self.p }
    }

    pub fn moments(&self) -> MomentSummary {
        compute_moments(&self.distribution()).expect("validated at construction")
    }

    pub fn lattice(&self) -> LatticeSpec {
        minimal_lattice(&self.distribution()).expect("two-point laws are lattices")
    }

    /// Wins needed: the net gain exceeds ε iff the win count T exceeds this.
    fn win_threshold(&self, n: u64, epsilon: f64) -> f64 {
        let t = (epsilon - self.v1 * n as f64) / (self.v2 - self.v1);
        let r = t.round();
        if (t - r).abs() <= 1e-9 * t.abs().max(1.0) { r } else { t }
    }
}

impl std::str::FromStr for BetSpec {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red-or-black" | "red" | "black" => Ok(Self::red_or_black()),
            "single-number" | "single" => Ok(Self::single_number()),
            other => Err(invalid(format!(
                "unknown bet `{other}` (expected red-or-black or single-number)"
            ))),
        }
    }
}

fn check(n: u64, epsilon: f64) -> Result<()> {
    ensure_sample_size(n)?;
    ensure_finite("epsilon", epsilon)?;
    if epsilon < 0.0 {
        return Err(invalid(format!("epsilon must be non-negative, got {epsilon}")));
    }
    Ok(())
}

/// θ_n(ε) = P(S_n > ε), with S_n the net gain after n plays.
pub fn theta_exact(bet: &BetSpec, n: u64, epsilon: f64) -> Result<f64> {
    check(n, epsilon)?;
    let t = bet.win_threshold(n, epsilon);
    if t < 0.0 {
        return Ok(1.0);
    }
    let k = t.floor();
    if k >= n as f64 {
        return Ok(0.0);
    }
    binomial_sf(n, bet.p, k as u64)
}

/// Which terms to add to Φ when approximating θ_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corrections {
    pub skewness: bool,
    pub lattice: bool,
}

impl Corrections {
    pub const NONE: Self = Self { skewness: false, lattice: false };
    pub const SKEW: Self = Self { skewness: true, lattice: false };
    pub const ALL: Self = Self { skewness: true, lattice: true };
}

/// 1 − [Φ(z*) + A_n(z*) + lattice term] at z* = (ε/n − μ)√n/σ, with the
/// bracketed terms included according to `corrections`.
pub fn theta_approx(bet: &BetSpec, n: u64, epsilon: f64, corrections: Corrections) -> Result<f64> {
    check(n, epsilon)?;
    let ms = bet.moments();
    let nf = n as f64;
    let z = (epsilon / nf - ms.mu) * nf.sqrt() / ms.sigma;
    let mut theta = norm_sf(z);
    if corrections.skewness {
        theta -= a_term(nf, z, ms.skewness);
    }
    if corrections.lattice {
        theta -= lattice_term(n, z, &bet.lattice(), ZigzagConfig::default())?;
    }
    Ok(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouletteResult {
    pub n: u64,
    pub epsilon: f64,
    pub theta_exact: f64,
    pub theta_o1: f64,
    pub theta_skew: f64,
    pub theta_skew_lattice: f64,
}

/// Exact and approximate θ_n(ε) for every n in `ns`.
pub fn roulette_sweep(bet: &BetSpec, ns: impl IntoIterator<Item = u64>, epsilon: f64) -> Result<Vec<RouletteResult>> {
    ns.into_iter()
        .map(|n| {
            Ok(RouletteResult {
                n,
                epsilon,
                theta_exact: theta_exact(bet, n, epsilon)?,
                theta_o1: theta_approx(bet, n, epsilon, Corrections::NONE)?,
                theta_skew: theta_approx(bet, n, epsilon, Corrections::SKEW)?,
                theta_skew_lattice: theta_approx(bet, n, epsilon, Corrections::ALL)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglePlayFacts {
    pub n: u64,
    /// p·v2 + (1 − p)·v1.
    pub expected_net_gain_per_play: f64,
    /// −n times the expected net gain per play.
    pub expected_house_take: f64,
    /// Net gain of the most probable outcome after n plays, and its probability.
    pub most_likely_net_gain: f64,
    pub most_likely_outcome_prob: f64,
    /// P(S_n = +1); 0 when a net gain of exactly one unit is unattainable.
    pub prob_net_plus_one: f64,
}

pub fn single_play_facts(bet: &BetSpec, n: u64) -> Result<SinglePlayFacts> {
    ensure_sample_size(n)?;
    let gain = bet.p * bet.v2 + (1.0 - bet.p) * bet.v1;
    let net = |wins: u64| bet.v1 * (n - wins) as f64 + bet.v2 * wins as f64;
    let mut mode = (0u64, 0.0f64);
    for k in 0..=n {
        let pk = binomial_pmf(n, bet.p, k)?;
        if pk > mode.1 {
            mode = (k, pk);
        }
    }
    let t = bet.win_threshold(n, 1.0);
    let prob_net_plus_one = if t >= 0.0 && t <= n as f64 && t.fract() == 0.0 {
        binomial_pmf(n, bet.p, t as u64)?
    } else {
        0.0
    };
    Ok(SinglePlayFacts {
        n,
        expected_net_gain_per_play: gain,
        expected_house_take: -(n as f64) * gain,
        most_likely_net_gain: net(mode.0),
        most_likely_outcome_prob: mode.1,
        prob_net_plus_one,
    })
}
