use thiserror::Error;

use crate::dataset::DatasetError;
use crate::metrics::MetricError;
use crate::packing::PackError;
use crate::service::ServiceError;
use crate::topics::TopicError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error. Each subsystem has its own error enum; this wraps them
/// for callers (the CLI, the FFI layer) that cross module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
