use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("operation not supported for {0}")]
    Unsupported(&'static str),

    #[error("no positive Cramer root: {0}")]
    NoRoot(String),

    #[error("grid and kernel mismatch: {0}")]
    Mismatch(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("insufficient points for fit: {found} usable, need at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("signal below noise in fit window [{lo}, {hi}]")]
    SignalBelowNoise { lo: f64, hi: f64 },

    #[error("ambiguous regime: {0}")]
    AmbiguousRegime(String),

    #[error("decay family mismatch: predicted {predicted}, fitted {fitted}")]
    FamilyMismatch {
        predicted: &'static str,
        fitted: &'static str,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("config hash mismatch: expected {expected}, found {found} in {file}")]
    HashMismatch {
        expected: String,
        found: String,
        file: String,
    },

    #[error("missing input {path}: {hint}")]
    MissingInput { path: String, hint: String },

    #[error("malformed data in {file}: {reason}")]
    Malformed { file: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
