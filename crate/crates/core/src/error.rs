use thiserror::Error;

/// Errors raised across the sensing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A statistic or decomposition is undefined for this input
    /// (zero energy, zero eigenvalue, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    /// Malformed or inconsistent file content.
    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::Format(_) | Error::Io(_) | Error::CalibrationFailed(_) => 3,
            Error::Degenerate(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
