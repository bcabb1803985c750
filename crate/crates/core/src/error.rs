use thiserror::Error;

use crate::solvers::SolveTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A non-finite objective or subgradient was produced. The trace holds
    /// every record written before the failure.
    #[error("solver diverged at cumulative iteration {cum_iter}")]
    Divergence {
        cum_iter: u64,
        trace: Box<SolveTrace>,
    },

    #[error("unsupported constraint: {0}")]
    UnsupportedConstraint(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("budget exceeded: {required} evaluations required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("inconsistent oracle: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
