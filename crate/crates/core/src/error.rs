//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FrameError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FrameError {
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid exponent p = {0}: require 1 <= p < inf")]
    InvalidExponent(f64),

    #[error("sequence length must be at least 1")]
    EmptySequence,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{what} is not in the subset `{subset}`")]
    NotInSubset { what: String, subset: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("exponent mismatch: expected p = {expected}, got p = {got}")]
    ExponentMismatch { expected: f64, got: f64 },

    #[error("sampler exhausted: {0}")]
    SamplerExhausted(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("divergence at iteration {iteration} (residual {residual:e} grew 10 times in a row)")]
    Divergence { iteration: usize, residual: f64 },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

impl FrameError {
    /// True for failures of the numerical machinery (solver, evaluation)
    /// as opposed to violated input contracts.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FrameError::NoConvergence { .. }
                | FrameError::Divergence { .. }
                | FrameError::Evaluation(_)
                | FrameError::NonFinite(_)
                | FrameError::SamplerExhausted(_)
        )
    }
}
