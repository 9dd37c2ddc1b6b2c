//! Reproducible Monte Carlo for standardized sample means.
//!
//! Replicate r draws from its own ChaCha8 stream (seed, stream = r), so the
//! output depends only on (seed, n, replicates) and never on how replicates
//! are split across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist_model::{compute_moments, DistributionSpec};
use crate::error::{invalid, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CLT_SCOPE_THREADS";

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn env_thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Observations per mean.
    pub n: u64,
    /// Number of means M.
    pub replicates: u64,
    pub seed: u64,
    /// Number of contiguous replicate blocks run concurrently.
    pub parallel_chunks: usize,
}

impl SimConfig {
    pub fn new(n: u64, replicates: u64, seed: u64, parallel_chunks: usize) -> Result<Self> {
        if n == 0 || replicates == 0 || parallel_chunks == 0 {
            return Err(invalid("n, replicates and parallel chunks must all be positive"));
        }
        Ok(Self { n, replicates, seed, parallel_chunks })
    }
}

enum Sampler {
    Population(Vec<f64>),
    Weighted(Vec<f64>, WeightedIndex<f64>),
}

impl Sampler {
    fn new(dist: &DistributionSpec) -> Result<Self> {
        Ok(match dist {
            DistributionSpec::FinitePopulation { values } => Self::Population(values.clone()),
            _ => {
                let (values, weights): (Vec<f64>, Vec<f64>) = dist.atoms().into_iter().unzip();
                let index = WeightedIndex::new(&weights).map_err(|e| invalid(e.to_string()))?;
                Self::Weighted(values, index)
            }
        })
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Population(v) => v[rng.random_range(0..v.len())],
            Self::Weighted(v, idx) => v[idx.sample(rng)],
        }
    }
}

/// M draws of (Ȳ_n − μ)√n/σ, in replicate order.
pub fn simulate_standardized_means(dist: &DistributionSpec, cfg: &SimConfig) -> Result<Vec<f64>> {
    SimConfig::new(cfg.n, cfg.replicates, cfg.seed, cfg.parallel_chunks)?;
    let ms = compute_moments(dist)?;
    let sampler = Sampler::new(dist)?;
    let scale = (cfg.n as f64).sqrt() / ms.sigma;
    let one = |r: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r);
        let mut sum = 0.0;
        for _ in 0..cfg.n {
            sum += sampler.draw(&mut rng);
        }
        (sum / cfg.n as f64 - ms.mu) * scale
    };
    let m = cfg.replicates as usize;
    let mut out = vec![0.0; m];
    let chunks = cfg.parallel_chunks.min(m);
    if chunks == 1 {
        out.iter_mut().enumerate().for_each(|(r, x)| *x = one(r as u64));
        return Ok(out);
    }
    let block = m.div_ceil(chunks);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(chunks)
        .build()
        .map_err(|e| invalid(format!("cannot start worker threads: {e}")))?;
    pool.install(|| {
        out.par_chunks_mut(block).enumerate().for_each(|(c, slice)| {
            let base = c * block;
            for (i, x) in slice.iter_mut().enumerate() {
                *x = one((base + i) as u64);
            }
        })
    });
    Ok(out)
}

/// An ascending copy of a sample, for repeated quantile and tail queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample(Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub p: f64,
    pub value: f64,
    /// Half the spread of the order statistics ±√(Mp(1−p)) ranks away.
    pub std_error: f64,
}

impl SortedSample {
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(invalid("sample is empty"));
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(invalid("sample contains NaN"));
        }
        sample.sort_unstable_by(f64::total_cmp);
        Ok(Self(sample))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn at_rank(&self, rank: f64) -> f64 {
        let m = self.0.len();
        let i = (rank.ceil() as i64).clamp(1, m as i64) as usize;
        self.0[i - 1]
    }

    /// Left-continuous inverse of the empirical CDF: x_(⌈Mp⌉).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("quantile level must lie in (0, 1), got {p}")));
        }
        Ok(self.at_rank(self.0.len() as f64 * p))
    }

    pub fn quantile_with_se(&self, p: f64) -> Result<QuantileEstimate> {
        let value = self.quantile(p)?;
        let m = self.0.len() as f64;
        let spread = (m * p * (1.0 - p)).sqrt();
        let hi = self.at_rank(m * p + spread);
        let lo = self.at_rank(m * p - spread);
        Ok(QuantileEstimate { p, value, std_error: 0.5 * (hi - lo) })
    }

    /// #{x > z}/M.
    pub fn tail_fraction(&self, z: f64) -> f64 {
        let above = self.0.len() - self.0.partition_point(|&x| x <= z);
        above as f64 / self.0.len() as f64
    }
}

pub fn empirical_quantile(sample: &[f64], p: f64) -> Result<f64> {
    SortedSample::new(sample.to_vec())?.quantile(p)
}

pub fn empirical_tail_fraction(sample: &[f64], z: f64) -> Result<f64> {
    Ok(SortedSample::new(sample.to_vec())?.tail_fraction(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::norm_quantile;
    use rand_distr::StandardNormal;

    #[test]
    fn two_point_unit_sample_is_pm_one() {
        let d = DistributionSpec::two_point(-1.0, 1.0, 0.5).unwrap();
        let s = simulate_standardized_means(&d, &SimConfig::new(1, 1000, 3, 1).unwrap()).unwrap();
        assert!(s.iter().all(|&x| x == 1.0 || x == -1.0));
        assert!(s.contains(&1.0) && s.contains(&-1.0));
    }

    #[test]
    fn standardization_moments() {
        let d = DistributionSpec::finite_pmf(vec![0.0, 1.0, 5.0], vec![0.6, 0.3, 0.1]).unwrap();
        let ms = compute_moments(&d).unwrap();
        let n = 4u64;
        let m = 200_000usize;
        let s = simulate_standardized_means(&d, &SimConfig::new(n, m as u64, 11, 4).unwrap()).unwrap();
        let mf = m as f64;
        let mean = s.iter().sum::<f64>() / mf;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / mf;
        let skew = s.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / mf / var.powf(1.5);
        assert!(mean.abs() < 3.0 / mf.sqrt());
        assert!((var.sqrt() - 1.0).abs() < 3.0 / (2.0 * mf).sqrt() * 2.0);
        // SE of the sample skewness is about √(6/M) for near-Normal data;
        // doubled here for the heavier tail
        let target = ms.skewness / (n as f64).sqrt();
        assert!((skew - target).abs() < 3.0 * 2.0 * (6.0 / mf).sqrt(), "{skew} vs {target}");
    }

    #[test]
    fn chunking_does_not_change_output() {
        let d = DistributionSpec::finite_population(vec![1.0, 2.0, 2.0, 9.0, 40.0]).unwrap();
        let base = simulate_standardized_means(&d, &SimConfig::new(7, 10_001, 42, 1).unwrap()).unwrap();
        for chunks in [2usize, 3, 8, 64] {
            let other = simulate_standardized_means(&d, &SimConfig::new(7, 10_001, 42, chunks).unwrap()).unwrap();
            assert_eq!(base, other);
        }
        let again = simulate_standardized_means(&d, &SimConfig::new(7, 10_001, 42, 1).unwrap()).unwrap();
        assert_eq!(base, again);
        let reseeded = simulate_standardized_means(&d, &SimConfig::new(7, 10_001, 43, 1).unwrap()).unwrap();
        assert_ne!(base, reseeded);
    }

    #[test]
    fn degenerate_population_rejected() {
        let d = DistributionSpec::FinitePopulation { values: vec![3.0, 3.0] };
        assert!(simulate_standardized_means(&d, &SimConfig::new(2, 10, 1, 1).unwrap()).is_err());
    }

    #[test]
    fn quantile_convention() {
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0, 2.0], 0.51).unwrap(), 3.0);
        assert!(empirical_quantile(&[], 0.5).is_err());
        assert_eq!(empirical_tail_fraction(&[1.0, 2.0, 3.0], 1e9).unwrap(), 0.0);
        assert!((empirical_tail_fraction(&[1.0, 2.0, 3.0], 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normal_sample_quantile() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sample: Vec<f64> = (0..1_000_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let s = SortedSample::new(sample).unwrap();
        let q = s.quantile_with_se(0.9995).unwrap();
        assert!((q.value - 3.291).abs() < 0.1);
        assert!((q.value - norm_quantile(0.9995)).abs() < 4.0 * q.std_error);
        assert!(q.std_error > 0.0 && q.std_error < 0.05);
    }
}
