use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("merge refused: {0}")]
    Merge(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
    #[error("no closed form for {0}")]
    NoClosedForm(String),
    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
