use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Frequency outside the span covered by an absorption table.
    #[error("frequency {freq} Hz outside table coverage [{lo}, {hi}] Hz")]
    FrequencyOutOfRange { freq: f64, lo: f64, hi: f64 },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid absorption table: {0}")]
    InvalidTable(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configuration or scenario value broke a constraint. `key` names the
    /// offending setting.
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("transition variant `{0}` is not one of normal, aaf, abf")]
    UnknownVariant(String),

    #[error("non-finite feature vector rejected")]
    NonFiniteSample,

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(key: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
