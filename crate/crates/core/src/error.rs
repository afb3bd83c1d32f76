use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization failed: {0}")]
    FactorizationFailed(String),

    /// The solver hit its iteration limit without reaching optimality or a
    /// certificate; callers that probe feasibility treat this conservatively.
    #[error("solver was indeterminate after {iterations} iterations (max residual {max_residual:.3e})")]
    Indeterminate { iterations: usize, max_residual: f64 },

    /// Propagated by algorithms for which infeasibility of the underlying
    /// program is a hard failure rather than an expected outcome.
    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
