use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed weight function: {0}")]
    MalformedSpec(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("numeric failure in {what}: bracket [{lo:e}, {hi:e}]")]
    NumericFailure { what: &'static str, lo: f64, hi: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("empty domain: no sample points")]
    EmptyDomain,

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("quadrature did not converge: coarse {coarse:e}, fine {fine:e}")]
    Quadrature { coarse: f64, fine: f64 },

    #[error("fast path unavailable: {0}")]
    FastPathUnavailable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
