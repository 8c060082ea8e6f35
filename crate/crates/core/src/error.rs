use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("time {t} s outside the pass window [0, {duration}] s")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl SimError {
    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        SimError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
