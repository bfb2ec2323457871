use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("below grid resolution: {0}")]
    Resolution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("geometry check failed: {0}")]
    Geometry(String),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
