use thiserror::Error;

/// Errors raised by the evolution, zipper, measure and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("domain error: t = {t} is outside [0, {end}]")]
    Domain { t: f64, end: f64 },

    #[error("hull collision at step {step}: point came within {distance:e} of the driving value")]
    HullCollision { step: usize, distance: f64 },

    #[error("branch violation at step {step}: f2 = {f2}, lambda = {lambda}, f1 = {f1}")]
    Branch {
        step: usize,
        f1: f64,
        f2: f64,
        lambda: f64,
    },

    #[error("geometry error at vertex {index}: {reason}")]
    Geometry { index: usize, reason: String },

    #[error("bound recurrence diverged at step {step}: denominator {denominator}")]
    Divergence { step: usize, denominator: f64 },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("{lost} of {total} walkers exhausted their step budget")]
    WalkerBudget { lost: u64, total: u64 },

    #[error("invalid input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
