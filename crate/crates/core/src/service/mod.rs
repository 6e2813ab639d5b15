//! HTTP frontend between authors and model backends.
//!
//! The frontend builds a generation context from a stored story, asks a
//! registered backend to `preprocess` and `generate`, truncates the output
//! to whole sentences, and records the suggestion. Authors later publish
//! their edited text with ratings; the frontend scores the edit against the
//! suggestion and serves per-model aggregates on `/dashboard`.
//!
//! All state lives in an append-only JSON-lines log under the data
//! directory and is rebuilt by replaying it at startup.

mod backend;
mod config;
mod dashboard;
mod http;
mod mock;
mod store;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetError;
use crate::metrics::MetricError;
use crate::packing::PackError;

pub use backend::{
    BackendDescriptor, BackendStatus, ContextBundle, ContextSegment, HttpBackend, ModelBackend, PreparedContext,
};
pub use config::{GenerationConfig, ServiceConfig};
pub use dashboard::{dashboard, CorrelationCell, DashboardFilter, DashboardSummary, ModelSummary, SortKey};
pub use http::{router, serve, AppState, PublishRequest, RecordView, RegisterRequest, ShutdownRequest, SuggestRequest};
pub use mock::{mock_router, serve_mock, MockBackend};
pub use store::{
    LogEvent, PublishedRecord, Ratings, RecordStore, ReplayReport, StoredScores, SuggestionRecord,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{0}` is already registered")]
    DuplicateModel(String),
    #[error("model `{0}` is not ready")]
    NotReady(String),
    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("backend error: {0}")]
    BackendError(String),
    #[error("unknown story `{0}`")]
    UnknownStory(String),
    #[error("unknown suggestion {0}")]
    UnknownSuggestion(u64),
    #[error("suggestion {0} is already published")]
    AlreadyPublished(u64),
    #[error("rating `{field}` = {value} is outside 1..=5")]
    RatingOutOfRange { field: &'static str, value: i64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("storage: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::UnknownModel(_) => "UnknownModel",
            ServiceError::DuplicateModel(_) => "DuplicateModel",
            ServiceError::NotReady(_) => "NotReady",
            ServiceError::BackendUnreachable(_) => "BackendUnreachable",
            ServiceError::BackendError(_) => "BackendError",
            ServiceError::UnknownStory(_) => "UnknownStory",
            ServiceError::UnknownSuggestion(_) => "UnknownSuggestion",
            ServiceError::AlreadyPublished(_) => "AlreadyPublished",
            ServiceError::RatingOutOfRange { .. } => "RatingOutOfRange",
            ServiceError::InvalidRequest(_) => "InvalidRequest",
            ServiceError::Dataset(_) => "DatasetError",
            ServiceError::Pack(_) => "PackError",
            ServiceError::Metric(_) => "MetricError",
            ServiceError::Storage(_) => "StorageError",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownModel(_)
            | ServiceError::UnknownStory(_)
            | ServiceError::UnknownSuggestion(_) => StatusCode::NOT_FOUND,
            ServiceError::DuplicateModel(_) | ServiceError::NotReady(_) | ServiceError::AlreadyPublished(_) => {
                StatusCode::CONFLICT
            }
            ServiceError::BackendUnreachable(_) | ServiceError::BackendError(_) => StatusCode::BAD_GATEWAY,
            ServiceError::RatingOutOfRange { .. }
            | ServiceError::Dataset(_)
            | ServiceError::Pack(_)
            | ServiceError::Metric(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.kind().to_string(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}
