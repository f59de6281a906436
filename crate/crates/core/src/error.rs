use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqgError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("dyadic level {level} exceeds the highest available level {j_max}")]
    LevelOutOfRange { level: usize, j_max: usize },

    #[error("grid of size {n} with box length {box_length} hosts only {levels} dyadic levels (need at least 3)")]
    GridTooSmall {
        n: usize,
        box_length: f64,
        levels: usize,
    },

    #[error("time series is empty")]
    EmptySeries,

    #[error("blow-up at step {step} (t = {time}): {reason}")]
    BlowUp {
        step: usize,
        time: f64,
        reason: String,
    },

    #[error("Picard iterates stopped contracting; measured distances {distances:?}")]
    NonContraction { distances: Vec<f64> },

    #[error("quadrature did not converge: Richardson estimate {estimate:.3e} after {points} points per axis")]
    QuadratureNotConverged { estimate: f64, points: usize },

    #[error("frequency budget exceeded: {0}")]
    FrequencyBudget(String),
}

pub type Result<T> = std::result::Result<T, SqgError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(SqgError::Parameter(msg.into()))
}
