use thiserror::Error;

/// Errors raised by the numerical operators and generators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("unsupported endpoint weight: {0}")]
    UnsupportedWeight(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("kernel overflow: {0}")]
    KernelOverflow(String),

    #[error("integrand looked ahead: requested node {requested}, prefix ends at node {available}")]
    LookAhead { requested: usize, available: usize },

    #[error("partition time {time} is not a grid node")]
    MisalignedPartition { time: f64 },

    #[error("too few replicates: got {got}, need at least {need}")]
    TooFewReplicates { got: usize, need: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("constant series: every block has zero standard deviation")]
    ConstantSeries,

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("epsilon schedule: {0}")]
    Schedule(String),

    #[error("u-grid underflow: {0}")]
    Underflow(String),

    #[error("component did not converge: {0}")]
    NotConverged(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(invalid("hurst", format!("{h} is outside (0, 1)")))
    }
}
