//! Command-line grammar. Every numeric flag is range-checked here, before any
//! computation starts.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "clt-scope",
    version,
    about = "How accurate is the Central Limit Theorem at your sample size?",
    long_about = "Edgeworth, Cornish-Fisher and lattice corrections to the Normal \
approximation of a sample mean, sample sizes for a target accuracy, distances to \
the Normal limit, exact Binomial oracles and two case studies (roulette, incomes).\n\n\
Results are written as CSV (default) or JSON with a provenance header. The \
CLT_SCOPE_THREADS environment variable caps the number of worker threads used by \
Monte Carlo runs; it never changes their output."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean, SD, skewness, excess kurtosis and absolute third moment of a
    /// distribution and of its sample means
    Moments(MomentsArgs),
    /// Edgeworth CDF or PDF approximations of the standardized mean on a z grid
    Edgeworth(EdgeworthArgs),
    /// Cornish-Fisher quantiles of the standardized mean
    CornishFisher(CornishFisherArgs),
    /// Lattice-corrected CDF of the standardized mean of a discrete law, or the
    /// zig-zag function J itself
    Lattice(LatticeArgs),
    /// Sample sizes n3* and n34* for a target CDF error, plus optional
    /// Berry-Esseen, WLLN and non-negative density sizes
    SampleSize(SampleSizeArgs),
    /// KS, Wasserstein, Bhattacharyya, Hellinger, KL and Jensen-Shannon
    /// distances between two tabulated functions
    Distances(DistancesArgs),
    /// Exact and de Moivre central Binomial probabilities P(|S - np| <= d)
    DemoivreTable(DemoivreArgs),
    /// Probability of being ahead after n identical roulette bets, exact and
    /// approximated
    Roulette(RouletteArgs),
    /// Seeded Monte Carlo of standardized sample means
    Simulate(SimulateArgs),
    /// Income case study: sizing table, correction curves, error surface and
    /// optional Monte Carlo quantile tracking
    Income(IncomeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Edgeworth(_) => "edgeworth",
            Command::CornishFisher(_) => "cornish-fisher",
            Command::Lattice(_) => "lattice",
            Command::SampleSize(_) => "sample-size",
            Command::Distances(_) => "distances",
            Command::DemoivreTable(_) => "demoivre-table",
            Command::Roulette(_) => "roulette",
            Command::Simulate(_) => "simulate",
            Command::Income(_) => "income",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output
    #[arg(long, short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Significant digits for floating-point values (1 to 17)
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,
    /// Also write every table as DIR/<subcommand>_<table>.csv
    #[arg(long, value_name = "DIR")]
    pub plot_dir: Option<PathBuf>,
}

/// A two-point law "v1,v2,p": value v2 with probability p, v1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointArg {
    pub v1: f64,
    pub v2: f64,
    pub p: f64,
}

fn parse_two_point(s: &str) -> Result<TwoPointArg, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [v1, v2, p] = parts.as_slice() else {
        return Err("expected three comma-separated numbers V1,V2,P".into());
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let (v1, v2, p) = (finite(num(v1)?)?, finite(num(v2)?)?, num(p)?);
    if !(p > 0.0 && p < 1.0) {
        return Err(format!("probability must lie strictly between 0 and 1, got {p}"));
    }
    if v1 == v2 {
        return Err("the two values must differ".into());
    }
    Ok(TwoPointArg { v1, v2, p })
}

fn finite(x: f64) -> Result<f64, String> {
    if x.is_finite() { Ok(x) } else { Err(format!("{x} is not finite")) }
}

pub fn parse_finite(s: &str) -> Result<f64, String> {
    finite(s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?)
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let x = parse_finite(s)?;
    if x > 0.0 { Ok(x) } else { Err(format!("must be positive, got {x}")) }
}

pub fn parse_non_negative(s: &str) -> Result<f64, String> {
    let x = parse_finite(s)?;
    if x >= 0.0 { Ok(x) } else { Err(format!("must be non-negative, got {x}")) }
}

/// A level strictly inside (0, 1).
pub fn parse_open_unit(s: &str) -> Result<f64, String> {
    let x = parse_finite(s)?;
    if x > 0.0 && x < 1.0 { Ok(x) } else { Err(format!("must lie strictly between 0 and 1, got {x}")) }
}

pub fn parse_unit(s: &str) -> Result<f64, String> {
    let x = parse_finite(s)?;
    if (0.0..=1.0).contains(&x) { Ok(x) } else { Err(format!("must lie in [0, 1], got {x}")) }
}

pub fn parse_count(s: &str) -> Result<u64, String> {
    match s.trim().parse::<u64>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("must be a positive integer, got `{s}`")),
    }
}

/// Where the distribution comes from. Exactly one source may be given.
#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Population CSV: one numeric column, `#` comments allowed
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// The population CSV starts with a header row
    #[arg(long, requires = "input")]
    pub header: bool,
    /// Two-point law V1,V2,P: value V2 with probability P, V1 otherwise
    #[arg(long, value_name = "V1,V2,P", value_parser = parse_two_point, allow_hyphen_values = true)]
    pub two_point: Option<TwoPointArg>,
    /// Support of a finite PMF (comma-separated, used with --probs)
    #[arg(long, value_delimiter = ',', value_parser = parse_finite, allow_hyphen_values = true, requires = "probs")]
    pub support: Option<Vec<f64>>,
    /// Probabilities of a finite PMF (comma-separated, used with --support)
    #[arg(long, value_delimiter = ',', value_parser = parse_unit, requires = "support")]
    pub probs: Option<Vec<f64>>,
    /// A named roulette bet
    #[arg(long, value_enum)]
    pub bet: Option<BetName>,
    /// The synthetic heavy-tailed income population (842 units)
    #[arg(long)]
    pub surrogate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetName {
    /// Even money on red or black, p = 18/38
    RedOrBlack,
    /// 35 to 1 on a single number, p = 1/38
    SingleNumber,
}

/// Standardized shape (λ, η) given directly, or moments of a distribution.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Skewness λ of one observation (dimensionless)
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Excess kurtosis η of one observation (dimensionless, Normal = 0)
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, requires = "lambda")]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub dist: DistArgs,
}

/// A z grid: explicit points, or min..max in steps.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Explicit z points (comma-separated); overrides the range flags
    #[arg(long, value_delimiter = ',', value_parser = parse_finite, allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
    /// Lower end of the z grid (standard units)
    #[arg(long, default_value_t = -3.5, value_parser = parse_finite, allow_negative_numbers = true)]
    pub z_min: f64,
    /// Upper end of the z grid (standard units)
    #[arg(long, default_value_t = 3.5, value_parser = parse_finite, allow_negative_numbers = true)]
    pub z_max: f64,
    /// Grid spacing (standard units)
    #[arg(long, default_value_t = 0.05, value_parser = parse_positive)]
    pub z_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Also report the moments of the mean of n observations (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub n: Vec<u64>,
    /// Skewness tolerance for the naive sample size (used with --delta-ek)
    #[arg(long, value_parser = parse_positive, requires = "delta_ek")]
    pub delta_s: Option<f64>,
    /// Excess kurtosis tolerance for the naive sample size (used with --delta-s)
    #[arg(long, value_parser = parse_positive, requires = "delta_s")]
    pub delta_ek: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cdf,
    Pdf,
}

#[derive(Debug, Clone, Args)]
pub struct EdgeworthArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Sample sizes (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "50,100")]
    pub n: Vec<u64>,
    /// Approximate the CDF or the density
    #[arg(long, value_enum, default_value_t = Kind::Cdf)]
    pub kind: Kind,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CornishFisherArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Sample sizes (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "4,10,25,50")]
    pub n: Vec<u64>,
    /// Probability levels, strictly increasing (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_open_unit,
          default_value = "0.0005,0.005,0.025,0.5,0.975,0.995,0.9995")]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Sample sizes (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "5,100")]
    pub n: Vec<u64>,
    /// Fourier terms used for the zig-zag function
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    pub terms: u32,
    /// Tabulate J itself (Fourier and piecewise) on the grid instead
    #[arg(long)]
    pub zigzag: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KurtosisForm {
    /// Hermite He4 form of the kurtosis term
    He4,
    /// Derivative form of the kurtosis term
    Derivative,
}

#[derive(Debug, Clone, Args)]
pub struct SampleSizeArgs {
    /// Skewness λ of one observation
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Excess kurtosis η of one observation (needed for n34*)
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Target CDF errors ε (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_open_unit, default_value = "0.01,0.005,0.001,0.0005")]
    pub eps: Vec<f64>,
    /// Quantile levels whose Normal z the sizes are computed at (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_open_unit, default_value = "0.975,0.995,0.9995")]
    pub z_quantiles: Vec<f64>,
    /// Form of the kurtosis term in the quartic for n34*
    #[arg(long, value_enum, default_value_t = KurtosisForm::He4)]
    pub kurtosis_form: KurtosisForm,
    /// Smallest n with a non-negative Edgeworth density on z >= this value
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub nonneg_z: Option<f64>,
    /// Absolute third standardized moment ρ for Berry-Esseen bounds
    #[arg(long, value_parser = parse_positive)]
    pub rho: Option<f64>,
    /// Sample sizes for the Berry-Esseen table (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "10,100,1000", requires = "rho")]
    pub be_n: Vec<u64>,
    /// Berry-Esseen constant C
    #[arg(long, value_parser = parse_positive)]
    pub be_c: Option<f64>,
    /// WLLN sizing: true proportion p (used with --wlln-half-width and --wlln-prob)
    #[arg(long, value_parser = parse_open_unit, requires_all = ["wlln_half_width", "wlln_prob"])]
    pub wlln_p: Option<f64>,
    /// WLLN sizing: half-width of the interval around p
    #[arg(long, value_parser = parse_positive, requires = "wlln_p")]
    pub wlln_half_width: Option<f64>,
    /// WLLN sizing: required coverage probability
    #[arg(long, value_parser = parse_open_unit, requires = "wlln_p")]
    pub wlln_prob: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DistancesArgs {
    /// First function: CSV with a `# kind=cdf|pdf` line and x,value rows
    #[arg(long, value_name = "PATH", requires = "right", conflicts_with = "normal_shift")]
    pub left: Option<PathBuf>,
    /// Second function, same format and kind as --left
    #[arg(long, value_name = "PATH", requires = "left")]
    pub right: Option<PathBuf>,
    /// Compare N(0,1) with N(δ,1) on the default grid instead of files
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub normal_shift: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DemoivreArgs {
    /// Number of trials
    #[arg(long, default_value_t = 100, value_parser = parse_count)]
    pub n: u64,
    /// Success probability
    #[arg(long, default_value_t = 0.5, value_parser = parse_open_unit)]
    pub p: f64,
    /// Largest half-width d (rows d = 0..=d-max)
    #[arg(long, default_value_t = 9)]
    pub d_max: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionSet {
    /// Exact and plain Normal
    None,
    /// Also the skewness correction
    Skew,
    /// Also skewness plus lattice correction
    All,
}

#[derive(Debug, Clone, Args)]
pub struct RouletteArgs {
    /// Named bet
    #[arg(long, value_enum, default_value_t = BetName::SingleNumber, conflicts_with = "two_point")]
    pub bet: BetName,
    /// Custom bet V1,V2,P: net V2 with probability P, net V1 otherwise
    #[arg(long, value_name = "V1,V2,P", value_parser = parse_two_point, allow_hyphen_values = true)]
    pub two_point: Option<TwoPointArg>,
    /// Explicit numbers of plays (comma-separated); overrides the range flags
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub n: Option<Vec<u64>>,
    /// First number of plays
    #[arg(long, default_value_t = 1, value_parser = parse_count)]
    pub n_min: u64,
    /// Last number of plays
    #[arg(long, default_value_t = 200, value_parser = parse_count)]
    pub n_max: u64,
    /// Step between numbers of plays
    #[arg(long, default_value_t = 1, value_parser = parse_count)]
    pub n_step: u64,
    /// Net gain (monetary units) that must be exceeded
    #[arg(long, default_value_t = 0.0, value_parser = parse_non_negative)]
    pub epsilon: f64,
    /// Which approximation columns to include
    #[arg(long, value_enum, default_value_t = CorrectionSet::All)]
    pub corrections: CorrectionSet,
    /// Also tabulate single-play facts at these numbers of plays
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub facts_n: Vec<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Number of simulated means M
    #[arg(long, default_value_t = 1_000_000, value_parser = parse_count)]
    pub replicates: u64,
    /// RNG seed
    #[arg(long, default_value_t = 20_240_101)]
    pub seed: u64,
    /// Replicate blocks run concurrently (default: available cores); capped by
    /// CLT_SCOPE_THREADS and never affects results
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub chunks: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Observations per mean
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Quantile levels to estimate (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_open_unit,
          default_value = "0.0005,0.025,0.5,0.975,0.9995")]
    pub quantiles: Vec<f64>,
    /// Report the fraction of means above these z values (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_finite, allow_hyphen_values = true)]
    pub tail_z: Vec<f64>,
    /// Also write the raw standardized means, one per line, in replicate order
    #[arg(long, value_name = "PATH")]
    pub samples: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IncomeArgs {
    /// Population CSV; the synthetic surrogate is used when absent
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// The population CSV starts with a header row
    #[arg(long, requires = "input")]
    pub header: bool,
    /// Override the population skewness (used with --eta)
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, requires = "eta")]
    pub lambda: Option<f64>,
    /// Override the population excess kurtosis (used with --lambda)
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true, requires = "lambda")]
    pub eta: Option<f64>,
    /// Sample sizes for the correction curves and error surface (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "50,100")]
    pub n: Vec<u64>,
    /// Target CDF errors ε (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_open_unit, default_value = "0.01,0.005,0.001,0.0005")]
    pub eps: Vec<f64>,
    /// Quantile levels for the sizing table (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_open_unit, default_value = "0.975,0.995,0.9995")]
    pub z_quantiles: Vec<f64>,
    /// Left edge z* of the region where the density must stay non-negative
    #[arg(long, default_value_t = -3.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub z_star: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Run the Monte Carlo quantile track
    #[arg(long)]
    pub track: bool,
    /// Sample sizes for the quantile track (comma-separated)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "4,10,25,50")]
    pub track_n: Vec<u64>,
    /// Quantile level tracked
    #[arg(long, default_value_t = 0.9995, value_parser = parse_open_unit)]
    pub track_p: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}
