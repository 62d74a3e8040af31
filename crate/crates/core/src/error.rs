use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at coordinate {index}")]
    NonFinite { index: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("norming functional is undefined for the zero vector")]
    ZeroVector,

    #[error("extreme-point cap {0} exceeds the hard limit of 2^20")]
    CapTooLarge(usize),

    #[error("invalid polynomial: {0}")]
    InvalidPoly(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned a non-finite value at {point:?}")]
    NonFiniteObjective { point: Vec<Complex64> },

    #[error("no attainment: estimated norm {estimate} is below 1 - {eta}")]
    NoAttainment { estimate: f64, eta: f64 },

    #[error("empty δ-slice for delta = {delta} (estimated norm of Q is {estimate})")]
    EmptySlice { delta: f64, estimate: f64 },

    #[error(
        "inconsistent radius estimators: attainment {attainment} vs ladder {ladder} (tolerance {tolerance})"
    )]
    Inconsistent {
        attainment: f64,
        ladder: f64,
        tolerance: f64,
    },

    #[error("degenerate composition: estimated norm of T∘Q is {norm}")]
    DegenerateComposition { norm: f64 },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
