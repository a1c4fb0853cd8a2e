use thiserror::Error;

use crate::state::Stage;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation requires a state at the {expected} stage, got {found}")]
    WrongStage { expected: Stage, found: Stage },

    #[error("expected {expected} amplitudes for the {stage} stage, got {found}")]
    DimensionMismatch {
        stage: Stage,
        expected: usize,
        found: usize,
    },

    #[error("state is not normalized (norm squared = {0})")]
    NotNormalized(f64),

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects values outside the closed unit interval (NaN included).
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}
