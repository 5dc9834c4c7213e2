//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "declared modulus `{name}` = {declared} is inconsistent with the computed value \
         {computed} (relative tolerance {tol:e})"
    )]
    InconsistentModulus {
        name: &'static str,
        declared: f64,
        computed: f64,
        tol: f64,
    },

    #[error("required moduli are unavailable: {0}")]
    ModuliUnavailable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empirical estimate failed: {0}")]
    EstimateFailed(String),

    #[error("point is not a solution: residual norm {residual_norm:e} exceeds {tol:e}")]
    NotASolution { residual_norm: f64, tol: f64 },

    #[error("prerequisite not satisfied: {0}")]
    PreconditionFailed(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid_parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
