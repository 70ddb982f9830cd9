use thiserror::Error;

/// Errors shared across the solver, knowledge, and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("position {pos} out of range 1..={n}")]
    Position { pos: usize, n: usize },

    #[error("oracle answers are inconsistent with every secret: {0}")]
    Inconsistent(String),

    #[error("state is infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("query budget exceeded: {0}")]
    Runaway(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
