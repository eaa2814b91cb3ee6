use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    /// A numerically computed quantity that must be an integer (or a group,
    /// or a symplectic matrix) failed its residue guard.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("generators do not stabilize the state: {0}")]
    NotStabilized(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    /// True for errors caused by bad input rather than by a failed internal check.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Consistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
