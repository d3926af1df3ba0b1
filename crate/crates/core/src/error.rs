use thiserror::Error;

use crate::solver::HistoryRecord;
use crate::vector::CVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Power iteration ran out of iterations. The last iterate and estimate are kept
    /// so callers can decide whether the partial answer is usable.
    #[error("{what} did not converge within {iterations} iterations (last estimate {estimate:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        estimate: f64,
        last_iterate: CVector,
    },

    /// A non-finite value appeared in an iterate.
    #[error("iteration diverged at k = {iteration}")]
    Diverged {
        iteration: usize,
        history: Vec<HistoryRecord>,
    },

    #[error("linear system is singular or not positive definite ({0})")]
    Singular(&'static str),

    /// Configuration rejected by the experiment schema.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension {dim} exceeds the dense limit {max}")]
    TooLarge { dim: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
