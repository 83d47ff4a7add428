use thiserror::Error;

/// Errors raised by the spectral engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least 4 cells, got {0}")]
    TooFewCells(usize),

    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid interaction: {0}")]
    InvalidInteraction(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (max residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("shift {shift} is not below the lowest eigenvalue")]
    ShiftTooHigh { shift: f64 },

    #[error("inverse iteration stagnated after {iterations} iterations")]
    Stagnation { iterations: usize },

    #[error("basis too large: {size} exceeds cap {cap}")]
    BasisTooLarge { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
