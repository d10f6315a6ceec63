use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction parameters (bad lattice size, exponent range, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A cube or point falls outside the domain box, or a parent cube would.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// Input data is unusable (non-finite entries, arity mismatch, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A point set or norm function is degenerate (rank-deficient, zero norm).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative solver failed to reach its tolerance within its cap.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
