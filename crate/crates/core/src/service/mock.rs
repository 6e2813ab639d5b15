use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use axum::extract::State;
use axum::routing::post;
use axum::{Json, Router};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;

use super::backend::{GenerateRequest, GenerateResponse, StatusResponse};
use super::{BackendStatus, ContextBundle, GenerationConfig, ModelBackend, PreparedContext, ServiceError};
use crate::packing::{pack, BundleSegment, Policy, SegmentSpec, SegmentVocabulary};

const SUBJECTS: [&str; 6] = ["The captain", "Mara", "The old ship", "A stranger", "The crew", "Her sister"];
const VERBS: [&str; 6] = ["watched", "followed", "remembered", "carried", "questioned", "ignored"];
const OBJECTS: [&str; 6] = [
    "the lantern",
    "a broken map",
    "the harbor lights",
    "the silent storm",
    "an iron key",
    "the last letter",
];
const ENDINGS: [&str; 6] = [
    "before dawn",
    "without a word",
    "in the rain",
    "as the bells rang",
    "with trembling hands",
    "at the edge of the cliff",
];

/// Sentences in every mock generation.
pub const MOCK_SENTENCES: usize = 6;

/// Deterministic stand-in for a language model.
///
/// `preprocess` packs the bundle into at most 1024 tokens with the default
/// generation policy. `generate` ignores sampling settings except as hash
/// input and returns six templated sentences chosen by a digest of the
/// prepared context and the config.
#[derive(Debug)]
pub struct MockBackend {
    ready: AtomicBool,
    policy: Policy,
}

impl Default for MockBackend {
    fn default() -> Self {
        Self {
            ready: AtomicBool::new(false),
            policy: Policy::default_generation(),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl MockBackend {
    pub fn status(&self) -> BackendStatus {
        if self.ready.load(Ordering::SeqCst) {
            BackendStatus::Ready
        } else {
            BackendStatus::Down
        }
    }

    fn check_ready(&self) -> Result<(), ServiceError> {
        if self.ready.load(Ordering::SeqCst) {
            Ok(())
        } else {
            Err(ServiceError::BackendError("mock backend is not started".into()))
        }
    }

    fn prepare(&self, bundle: &ContextBundle) -> Result<PreparedContext, ServiceError> {
        let mut vocab = SegmentVocabulary::standard();
        let segments: Vec<BundleSegment<String>> = bundle
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| BundleSegment {
                spec: SegmentSpec {
                    name: s.name.clone(),
                    segment_ids: s.labels.iter().map(|l| vocab.intern(l)).collect(),
                    available: s.tokens.len() as u32,
                    trim: s.trim,
                    declared_index: i as u32,
                },
                tokens: s.tokens.clone(),
            })
            .collect();
        let specs: Vec<SegmentSpec> = segments.iter().map(|s| s.spec.clone()).collect();
        // Bundles from other builders may not name every policy segment.
        let constraints = self.policy.constraints_for(&specs).unwrap_or_default();
        let separators: HashMap<String, String> = bundle
            .segments
            .iter()
            .map(|s| (s.name.clone(), format!("<|{}|>", s.name.split('.').next().unwrap_or(&s.name))))
            .collect();
        let packed = pack(&segments, &constraints, self.policy.context_budget(), &separators)?;
        let tokens: Vec<&str> = packed.context.items.iter().map(|i| i.token.as_str()).collect();
        let digest = Sha256::digest(serde_json::to_vec(&tokens).expect("tokens serialize"));
        Ok(PreparedContext {
            length: tokens.len(),
            digest: hex(&digest),
            payload: serde_json::json!({ "allocation": packed.allocation.to_string() }),
        })
    }

    /// The text `generate` returns, before any truncation.
    pub fn generate_text(prepared: &PreparedContext, config: &GenerationConfig) -> String {
        let mut h = Sha256::new();
        h.update(prepared.digest.as_bytes());
        h.update(serde_json::to_vec(config).expect("config serializes"));
        let d = h.finalize();
        (0..MOCK_SENTENCES)
            .map(|i| {
                let b = &d[4 * i..4 * i + 4];
                format!(
                    "{} {} {} {}.",
                    SUBJECTS[b[0] as usize % 6],
                    VERBS[b[1] as usize % 6],
                    OBJECTS[b[2] as usize % 6],
                    ENDINGS[b[3] as usize % 6]
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[async_trait]
impl ModelBackend for MockBackend {
    async fn startup(&self) -> Result<(), ServiceError> {
        self.ready.store(true, Ordering::SeqCst);
        Ok(())
    }

    async fn shutdown(&self) -> Result<(), ServiceError> {
        self.ready.store(false, Ordering::SeqCst);
        Ok(())
    }

    async fn preprocess(&self, bundle: &ContextBundle) -> Result<PreparedContext, ServiceError> {
        self.check_ready()?;
        self.prepare(bundle)
    }

    async fn generate(&self, prepared: &PreparedContext, config: &GenerationConfig) -> Result<String, ServiceError> {
        self.check_ready()?;
        Ok(Self::generate_text(prepared, config))
    }
}

/// The mock served over the backend HTTP protocol.
pub fn mock_router(backend: Arc<MockBackend>) -> Router {
    async fn startup(State(b): State<Arc<MockBackend>>) -> Result<Json<StatusResponse>, ServiceError> {
        b.startup().await?;
        Ok(Json(StatusResponse { status: b.status() }))
    }
    async fn shutdown(State(b): State<Arc<MockBackend>>) -> Result<Json<StatusResponse>, ServiceError> {
        b.shutdown().await?;
        Ok(Json(StatusResponse { status: b.status() }))
    }
    async fn preprocess(
        State(b): State<Arc<MockBackend>>,
        Json(bundle): Json<ContextBundle>,
    ) -> Result<Json<PreparedContext>, ServiceError> {
        Ok(Json(b.preprocess(&bundle).await?))
    }
    async fn generate(
        State(b): State<Arc<MockBackend>>,
        Json(req): Json<GenerateRequest>,
    ) -> Result<Json<GenerateResponse>, ServiceError> {
        let text = b.generate(&req.prepared, &req.config).await?;
        Ok(Json(GenerateResponse { text }))
    }
    Router::new()
        .route("/startup", post(startup))
        .route("/shutdown", post(shutdown))
        .route("/preprocess", post(preprocess))
        .route("/generate", post(generate))
        .with_state(backend)
}

/// Serves the mock backend until the process is interrupted.
pub async fn serve_mock(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, mock_router(Arc::new(MockBackend::default())))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
