use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("unsupported Hermite degree {0} (maximum is 8)")]
    UnsupportedDegree(usize),

    #[error("missing moment: {0} is required for this operation")]
    MissingMoment(&'static str),

    #[error("lattice is undefined for a finite population; supply an explicit PMF")]
    LatticeUndefined,

    #[error("support is not a lattice: {0}")]
    NonLattice(String),

    #[error("lattice standardization does not match the moment summary: {0}")]
    Inconsistent(String),

    #[error("grid truncates the distance integrand: {0}")]
    Truncation(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_probability(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 1), got {p}")))
    }
}

pub(crate) fn ensure_sample_size(n: u64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(invalid("sample size n must be at least 1"))
    }
}
