//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value produced by {context} at t = {t}")]
    NonFinite { context: &'static str, t: f64 },

    #[error(
        "expected jump count {expected:.3e} exceeds cap {cap:.3e}; \
         raise epsilon or lower the intensity"
    )]
    JumpCountCap { expected: f64, cap: f64 },

    #[error("control value is zero on a cell containing a jump event at t = {t}; density undefined")]
    ZeroControlCell { t: f64 },

    #[error("control is not admissible: {0}")]
    InadmissibleControl(String),

    #[error("state blew up (non-finite) at t = {t}")]
    BlowUp { t: f64 },

    #[error("fixed-point iteration diverged at t = {t} after {iterations} iterations")]
    FixedPointDiverged { t: f64, iterations: usize },

    #[error("brute-force search refused: {cells} control cells exceed the limit of {max}")]
    TooManyCells { cells: usize, max: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty ensemble")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
