use thiserror::Error;

/// Errors produced by the geometric and algebraic operations of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two arguments belong to different space models (or spaces).
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// An argument violates a mathematical precondition (e.g. a matrix that
    /// is not positive definite where an SPD point is required).
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument is syntactically valid but outside the allowed range
    /// (e.g. a geodesic parameter outside [0, 1]).
    #[error("usage error: {0}")]
    Usage(String),

    /// A requested computation would exceed the configured resource limits.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A value of a simple function is not covered by any supplied center.
    #[error("coverage error: atom {atom:?} has no center within {radius}")]
    Coverage { atom: String, radius: f64 },

    /// A staged approximation ran out of stages before reaching its target.
    #[error("approximation failure: achieved {achieved}, wanted < {target}")]
    ApproximationFailure { achieved: f64, target: f64 },

    /// Failure while reading or writing serialized data.
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::ModelMismatch(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
