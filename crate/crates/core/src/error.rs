use thiserror::Error;

/// Failure modes shared by every construction and checker in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state is not faithful: {0}")]
    NotFaithful(String),
    #[error("structure violation: {0}")]
    Structure(String),
    #[error("vector is not an eigenvector of the generator: residual {residual:e}")]
    Eigenvector { residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("solver did not converge after {iterations} iterations (last change {last_change:e})")]
    Convergence { iterations: usize, last_change: f64 },
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
