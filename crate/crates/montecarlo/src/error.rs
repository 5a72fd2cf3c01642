use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] demonlab_core::Error),
    #[error("tally overflow")]
    Overflow,
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("estimator undefined: {0}")]
    Degenerate(&'static str),
}

pub type Result<T, E = McError> = std::result::Result<T, E>;
