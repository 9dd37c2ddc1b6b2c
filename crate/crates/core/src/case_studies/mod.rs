//! End-to-end studies: repeated roulette bets, and IID sampling from a
//! heavily skewed finite population.

pub mod income;
pub mod monte_carlo;
pub mod roulette;

pub use income::{income_pipeline, surrogate_population, IncomeConfig, IncomeReport, SurrogateMixture};
pub use monte_carlo::{
    empirical_quantile, empirical_tail_fraction, env_thread_cap, simulate_standardized_means,
    QuantileEstimate, SimConfig, SortedSample, THREADS_ENV,
};
pub use roulette::{
    roulette_sweep, single_play_facts, theta_approx, theta_exact, BetSpec, Corrections,
    RouletteResult, SinglePlayFacts,
};
