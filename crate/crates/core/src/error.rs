use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point reference: {0}")]
    InvalidPoint(String),
    #[error("invalid dendrite: {0}")]
    InvalidDendrite(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty set where a nonempty one is required")]
    EmptySet,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("construction failed after {attempts} attempts: {reason}")]
    ConstructionFailed { attempts: u32, reason: String },
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
