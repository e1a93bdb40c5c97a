use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not an SDM: {0}")]
    InvalidSdm(String),

    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: String },

    #[error("linear system is ill-conditioned (condition bound {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("positivity breach at t = {time}: minimum eigenvalue {min_eigenvalue:.3e}")]
    PositivityBreach { time: f64, min_eigenvalue: f64 },

    #[error("finite-difference solution went negative at t = {time}: minimum value {min_value:.3e}")]
    NegativeDensity { time: f64, min_value: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("mesh with {points} points per dimension is too coarse (need more than {required})")]
    MeshTooCoarse { points: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
