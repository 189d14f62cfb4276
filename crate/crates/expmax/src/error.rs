use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs have inconsistent dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A value violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation is not supported for this input class;
    /// callers typically fall back to Monte Carlo.
    #[error("unsupported capability: {0}")]
    Capability(String),

    /// A Monte Carlo estimate registered no hits; enlarge the sample count.
    #[error("Monte Carlo estimate has zero hits (n = {n})")]
    ZeroHits { n: u64 },

    /// A configuration could not be classified into one of the documented
    /// boundary cases.
    #[error("classification error: {0}")]
    Classification(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }
}
