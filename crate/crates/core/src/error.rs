use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("catalog line {line}: {message}")]
    Catalog { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedParameters(msg.into())
    }
}
