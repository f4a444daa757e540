use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation
    /// (coincident kernel points, lambda = 0 where 1/lambda appears, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested configuration cannot be realized (packing too dense,
    /// empty partition, grid too coarse for the requested stencil, ...).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A problem exceeds a hard size cap meant to keep dense solves at
    /// desk scale.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A solver failed numerically (singular matrix, non-convergent
    /// extrapolation, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
