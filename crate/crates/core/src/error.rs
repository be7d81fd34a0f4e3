use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("interval does not fit the window: {0}")]
    Window(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bracket growth exceeded 2^128 while inverting at s = {0}")]
    Overflow(f64),

    #[error("no convergence after {iterations} iterations (last value {last_value}, residual {residual})")]
    NonConvergence {
        iterations: usize,
        last_value: f64,
        residual: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
