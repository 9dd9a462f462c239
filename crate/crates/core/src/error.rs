use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum QssError {
    /// A physical or model parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration file could not be parsed or contained unknown keys.
    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QssError>;

impl QssError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QssError::InvalidParameter(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        QssError::Domain(msg.into())
    }

    pub fn config(line: usize, msg: impl Into<String>) -> Self {
        QssError::Config {
            line,
            message: msg.into(),
        }
    }
}
