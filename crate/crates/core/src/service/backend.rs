use std::time::Duration;

use async_trait::async_trait;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{GenerationConfig, ServiceError};
use crate::packing::Trim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendStatus {
    Registered,
    Ready,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub name: String,
    /// `mock` for the in-process mock, otherwise the backend's base URL.
    pub endpoint: String,
    pub status: BackendStatus,
}

/// One context segment as sent to a backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSegment {
    pub name: String,
    /// Segment vocabulary labels for every token of the segment.
    pub labels: Vec<String>,
    pub trim: Trim,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContextBundle {
    pub segments: Vec<ContextSegment>,
}

/// A backend's prepared input. `payload` is opaque to the frontend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedContext {
    /// Model input length in tokens.
    pub length: usize,
    pub digest: String,
    #[serde(default)]
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct GenerateRequest {
    pub prepared: PreparedContext,
    pub config: GenerationConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct GenerateResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct StatusResponse {
    pub status: BackendStatus,
}

/// The four methods a model server implements.
#[async_trait]
pub trait ModelBackend: Send + Sync {
    async fn startup(&self) -> Result<(), ServiceError>;
    async fn shutdown(&self) -> Result<(), ServiceError>;
    async fn preprocess(&self, bundle: &ContextBundle) -> Result<PreparedContext, ServiceError>;
    async fn generate(&self, prepared: &PreparedContext, config: &GenerationConfig) -> Result<String, ServiceError>;
}

/// A backend reached over HTTP: JSON `POST`s to `/startup`, `/shutdown`,
/// `/preprocess` and `/generate` under a base URL.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    base: String,
    client: reqwest::Client,
}

impl HttpBackend {
    pub fn new(base: &str, timeout: Duration) -> Result<Self, ServiceError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ServiceError::BackendUnreachable(e.to_string()))?;
        Ok(Self {
            base: base.trim_end_matches('/').to_string(),
            client,
        })
    }

    async fn call<B: Serialize + ?Sized, R: DeserializeOwned>(&self, method: &str, body: &B) -> Result<R, ServiceError> {
        let url = format!("{}/{method}", self.base);
        let resp = self
            .client
            .post(&url)
            .json(body)
            .send()
            .await
            .map_err(|e| ServiceError::BackendUnreachable(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            let message = serde_json::from_str::<super::ErrorBody>(&text)
                .map(|b| b.message)
                .unwrap_or(text);
            return Err(ServiceError::BackendError(format!("{method}: {status}: {message}")));
        }
        resp.json()
            .await
            .map_err(|e| ServiceError::BackendError(format!("{method}: bad response: {e}")))
    }
}

#[async_trait]
impl ModelBackend for HttpBackend {
    async fn startup(&self) -> Result<(), ServiceError> {
        let _: StatusResponse = self.call("startup", &serde_json::json!({})).await?;
        Ok(())
    }

    async fn shutdown(&self) -> Result<(), ServiceError> {
        let _: StatusResponse = self.call("shutdown", &serde_json::json!({})).await?;
        Ok(())
    }

    async fn preprocess(&self, bundle: &ContextBundle) -> Result<PreparedContext, ServiceError> {
        self.call("preprocess", bundle).await
    }

    async fn generate(&self, prepared: &PreparedContext, config: &GenerationConfig) -> Result<String, ServiceError> {
        let req = GenerateRequest {
            prepared: prepared.clone(),
            config: config.clone(),
        };
        let resp: GenerateResponse = self.call("generate", &req).await?;
        Ok(resp.text)
    }
}
