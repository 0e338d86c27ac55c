use thiserror::Error;

/// Errors raised by the estimators, simulators and I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series too short: need at least 2 observations, got {0}")]
    TooShort(usize),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("confidence level {level} unreachable: {reason}")]
    LevelUnreachable { level: f64, reason: &'static str },

    #[error("confidence distribution never crosses {0} on the grid")]
    NoCrossing(f64),

    #[error("probit smoothing needs at least 2 grid points with 0.01 < C < 0.99, found {0}")]
    InsufficientPoints(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by bad input (files, flags, parse errors)
    /// as opposed to numerical failures inside a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::TooShort(_)
                | Error::NonFinite(_)
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
