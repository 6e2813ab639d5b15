use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::metrics::MetricConfig;
use crate::packing::Policy;

/// Sampling settings passed through to the backend untouched, except for
/// `max_sentences`, which the frontend enforces itself.
///
/// Omitted fields take their defaults. Because exactly one of `top_k` and
/// `top_p` may be set, a request choosing top-k sampling must also send
/// `"top_p": null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub top_k: Option<u32>,
    pub top_p: Option<f64>,
    pub temperature: f64,
    pub repetition_penalty: f64,
    /// Target length in tokens for the backend's length penalty.
    pub desired_length: u32,
    pub max_sentences: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            top_k: None,
            top_p: Some(0.9),
            temperature: 0.9,
            repetition_penalty: 1.2,
            desired_length: 256,
            max_sentences: 4,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        let bad = |m: &str| Err(ServiceError::InvalidRequest(m.into()));
        match (self.top_k, self.top_p) {
            (Some(_), Some(_)) | (None, None) => return bad("exactly one of top_k and top_p must be set"),
            (Some(0), None) => return bad("top_k must be positive"),
            (None, Some(p)) if !(p > 0.0 && p <= 1.0) => return bad("top_p must be in (0, 1]"),
            _ => {}
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if !(self.repetition_penalty > 0.0 && self.repetition_penalty.is_finite()) {
            return bad("repetition_penalty must be positive");
        }
        if self.max_sentences == 0 {
            return bad("max_sentences must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
    pub backend_timeout: Duration,
    pub policy: Policy,
    pub metric: MetricConfig,
}

pub const ENV_BIND: &str = "STORYLOOP_BIND";
pub const ENV_DATA_DIR: &str = "STORYLOOP_DATA_DIR";
pub const ENV_BACKEND_TIMEOUT: &str = "STORYLOOP_BACKEND_TIMEOUT_SECS";

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("storyloop-data"),
            backend_timeout: Duration::from_secs(30),
            policy: Policy::default_generation(),
            metric: MetricConfig {
                rouge_remove_stopwords: true,
                ..MetricConfig::default()
            },
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by `STORYLOOP_BIND`, `STORYLOOP_DATA_DIR` and
    /// `STORYLOOP_BACKEND_TIMEOUT_SECS`.
    pub fn from_env() -> Result<Self, ServiceError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ServiceError> {
        let mut c = Self::default();
        if let Some(v) = get(ENV_BIND) {
            c.bind = v
                .parse()
                .map_err(|e| ServiceError::InvalidRequest(format!("{ENV_BIND}={v}: {e}")))?;
        }
        if let Some(v) = get(ENV_DATA_DIR) {
            c.data_dir = PathBuf::from(v);
        }
        if let Some(v) = get(ENV_BACKEND_TIMEOUT) {
            let secs: f64 = v
                .parse()
                .ok()
                .filter(|s: &f64| *s > 0.0 && s.is_finite())
                .ok_or_else(|| ServiceError::InvalidRequest(format!("{ENV_BACKEND_TIMEOUT}={v}")))?;
            c.backend_timeout = Duration::from_secs_f64(secs);
        }
        Ok(c)
    }

    pub fn log_path(&self) -> PathBuf {
        self.data_dir.join("records.jsonl")
    }

    pub fn stories_dir(&self) -> PathBuf {
        self.data_dir.join("stories")
    }
}
