use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("exponent {0} is outside [1, inf]")]
    InvalidExponent(f64),

    #[error("eigensolver failed to converge")]
    Eigensolver,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositive { min_eig: f64 },

    #[error("negative power {power} of a singular matrix")]
    SingularPower { power: f64 },

    #[error("operator sequence is empty")]
    EmptySequence,

    #[error("window of radius {radius} does not fit a periodic grid of {grid_size} points")]
    WindowTooLarge { radius: usize, grid_size: usize },

    #[error("item {index} is not dominated (min eigenvalue of a - x_n is {min_eig:e})")]
    DominationViolated { index: usize, min_eig: f64 },

    #[error("middle factor {index} is not contractive (norm {norm})")]
    NotContractive { index: usize, norm: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
