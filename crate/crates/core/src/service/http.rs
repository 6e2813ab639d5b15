use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;

use super::store::now_ms;
use super::{
    dashboard, BackendDescriptor, BackendStatus, ContextBundle, ContextSegment, DashboardFilter, DashboardSummary,
    GenerationConfig, HttpBackend, MockBackend, ModelBackend, PublishedRecord, Ratings, RecordStore, ReplayReport,
    ServiceConfig, ServiceError, SortKey, StoredScores, SuggestionRecord,
};
use crate::dataset::{build_generation_example, generation_separators, load_corpus, load_story, save_story, Story};
use crate::metrics::{diff_view, score_pair, DiffSpan};
use crate::packing::{pack, SegmentVocabulary, Trim};
use crate::text::{truncate_sentences, StopwordList};

struct ModelEntry {
    descriptor: BackendDescriptor,
    backend: Arc<dyn ModelBackend>,
}

/// Shared frontend state.
pub struct AppState {
    config: ServiceConfig,
    store: RecordStore,
    models: RwLock<BTreeMap<String, ModelEntry>>,
    stories: RwLock<HashMap<String, Story>>,
    stopwords: StopwordList,
}

fn poisoned<T>(_: T) -> ServiceError {
    ServiceError::Storage("lock poisoned".into())
}

impl AppState {
    /// Replays the record log and loads stories from the data directory.
    pub fn open(config: ServiceConfig) -> Result<(Arc<Self>, ReplayReport), ServiceError> {
        let (store, report) = RecordStore::open(&config.log_path())?;
        let mut stories = HashMap::new();
        if config.stories_dir().is_dir() {
            for story in load_corpus(&config.data_dir)? {
                stories.insert(story.id.clone(), story);
            }
        }
        let state = Self {
            config,
            store,
            models: RwLock::new(BTreeMap::new()),
            stories: RwLock::new(stories),
            stopwords: StopwordList::english(),
        };
        Ok((Arc::new(state), report))
    }

    pub fn store(&self) -> &RecordStore {
        &self.store
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn backend(&self, name: &str) -> Result<Arc<dyn ModelBackend>, ServiceError> {
        let models = self.models.read().map_err(poisoned)?;
        let entry = models.get(name).ok_or_else(|| ServiceError::UnknownModel(name.to_string()))?;
        if entry.descriptor.status != BackendStatus::Ready {
            return Err(ServiceError::NotReady(name.to_string()));
        }
        Ok(entry.backend.clone())
    }

    pub async fn register(&self, name: &str, endpoint: &str) -> Result<BackendDescriptor, ServiceError> {
        if name.trim().is_empty() {
            return Err(ServiceError::InvalidRequest("model name must be nonempty".into()));
        }
        {
            let models = self.models.read().map_err(poisoned)?;
            if models.get(name).is_some_and(|m| m.descriptor.status != BackendStatus::Down) {
                return Err(ServiceError::DuplicateModel(name.to_string()));
            }
        }
        let backend: Arc<dyn ModelBackend> = if endpoint == "mock" {
            Arc::new(MockBackend::default())
        } else {
            Arc::new(HttpBackend::new(endpoint, self.config.backend_timeout)?)
        };
        let mut descriptor = BackendDescriptor {
            name: name.to_string(),
            endpoint: endpoint.to_string(),
            status: BackendStatus::Registered,
        };
        backend.startup().await?;
        descriptor.status = BackendStatus::Ready;
        let mut models = self.models.write().map_err(poisoned)?;
        if models.get(name).is_some_and(|m| m.descriptor.status != BackendStatus::Down) {
            return Err(ServiceError::DuplicateModel(name.to_string()));
        }
        models.insert(
            name.to_string(),
            ModelEntry {
                descriptor: descriptor.clone(),
                backend,
            },
        );
        Ok(descriptor)
    }

    pub async fn shutdown_model(&self, name: &str) -> Result<BackendDescriptor, ServiceError> {
        let backend = {
            let models = self.models.read().map_err(poisoned)?;
            models
                .get(name)
                .ok_or_else(|| ServiceError::UnknownModel(name.to_string()))?
                .backend
                .clone()
        };
        if let Err(e) = backend.shutdown().await {
            tracing::warn!(model = name, error = %e, "backend shutdown failed; marking down anyway");
        }
        let mut models = self.models.write().map_err(poisoned)?;
        let entry = models
            .get_mut(name)
            .ok_or_else(|| ServiceError::UnknownModel(name.to_string()))?;
        entry.descriptor.status = BackendStatus::Down;
        Ok(entry.descriptor.clone())
    }

    pub fn models(&self) -> Result<Vec<BackendDescriptor>, ServiceError> {
        Ok(self
            .models
            .read()
            .map_err(poisoned)?
            .values()
            .map(|m| m.descriptor.clone())
            .collect())
    }

    /// Validates and stores a story, also writing it to the data directory.
    pub fn add_story(&self, document: &str) -> Result<String, ServiceError> {
        let story = load_story(document)?;
        let dir = self.config.stories_dir();
        std::fs::create_dir_all(&dir).map_err(|e| ServiceError::Storage(e.to_string()))?;
        std::fs::write(dir.join(format!("{}.story", story.id)), save_story(&story))
            .map_err(|e| ServiceError::Storage(e.to_string()))?;
        let id = story.id.clone();
        self.stories.write().map_err(poisoned)?.insert(id.clone(), story);
        Ok(id)
    }

    pub async fn suggest(&self, req: &SuggestRequest) -> Result<SuggestionRecord, ServiceError> {
        req.config.validate()?;
        let story = self
            .stories
            .read()
            .map_err(poisoned)?
            .get(&req.story_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownStory(req.story_id.clone()))?;
        let backend = self.backend(&req.model)?;

        let mut vocab = SegmentVocabulary::standard();
        let mut example = build_generation_example(&story, req.scene_index, req.entry_index, &mut vocab)?;
        let policy = &self.config.policy;
        let mut specs: Vec<_> = example.bundle.iter().map(|b| b.spec.clone()).collect();
        policy.apply_trim(&mut specs);
        for (seg, spec) in example.bundle.iter_mut().zip(specs.iter()) {
            seg.spec.trim = spec.trim;
        }
        let constraints = policy.constraints_for(&specs)?;
        let packed = pack(&example.bundle, &constraints, policy.context_budget(), &generation_separators())?;

        let tokens: Vec<&str> = packed.context.items.iter().map(|i| i.token.as_str()).collect();
        let digest: String = Sha256::digest(serde_json::to_vec(&tokens).expect("tokens serialize"))
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let bundle = ContextBundle {
            segments: example
                .bundle
                .iter()
                .map(|seg| {
                    let len = packed.allocation.get(&seg.spec.name).unwrap_or(0) as usize;
                    let kept = match seg.spec.trim {
                        Trim::Head => &seg.tokens[..len],
                        Trim::Tail => &seg.tokens[seg.tokens.len() - len..],
                    };
                    ContextSegment {
                        name: seg.spec.name.clone(),
                        labels: seg
                            .spec
                            .segment_ids
                            .iter()
                            .map(|id| vocab.label(*id).unwrap_or_default().to_string())
                            .collect(),
                        trim: seg.spec.trim,
                        tokens: kept.to_vec(),
                    }
                })
                .collect(),
        };

        let prepared = backend.preprocess(&bundle).await?;
        let raw = backend.generate(&prepared, &req.config).await?;
        let text = truncate_sentences(&raw, req.config.max_sentences).trim().to_string();

        self.store.append_suggestion(|id| SuggestionRecord {
            id,
            model: req.model.clone(),
            story_id: req.story_id.clone(),
            scene_index: req.scene_index,
            entry_index: req.entry_index,
            context_digest: digest,
            context_length: packed.context.len(),
            generated_text: text,
            config: req.config.clone(),
            timestamp_ms: now_ms(),
        })
    }

    pub fn publish(&self, req: &PublishRequest) -> Result<PublishedRecord, ServiceError> {
        req.ratings.validate()?;
        let suggestion = self
            .store
            .suggestion(req.suggestion_id)
            .ok_or(ServiceError::UnknownSuggestion(req.suggestion_id))?;
        if self.store.published(req.suggestion_id).is_some() {
            return Err(ServiceError::AlreadyPublished(req.suggestion_id));
        }
        let scores = score_pair(
            &suggestion.generated_text,
            &req.final_text,
            &self.config.metric,
            &self.stopwords,
        )?;
        self.store.publish(PublishedRecord {
            suggestion_id: req.suggestion_id,
            model: suggestion.model,
            final_text: req.final_text.clone(),
            ratings: req.ratings,
            comment: req.comment.clone(),
            scores: StoredScores {
                user: scores.user,
                rouge_l: scores.rouge_l,
                rouge_w: scores.rouge_w,
            },
            spans: scores.spans,
            timestamp_ms: now_ms(),
        })
    }

    pub fn dashboard(&self, filter: &DashboardFilter) -> DashboardSummary {
        let (s, p) = self.store.snapshot();
        dashboard(&s, &p, filter)
    }

    pub fn diff(&self, id: u64, text: Option<&str>) -> Result<Vec<DiffSpan>, ServiceError> {
        let suggestion = self.store.suggestion(id).ok_or(ServiceError::UnknownSuggestion(id))?;
        let published = self.store.published(id);
        let edited = match (text, &published) {
            (Some(t), _) => t.to_string(),
            (None, Some(p)) => p.final_text.clone(),
            (None, None) => {
                return Err(ServiceError::InvalidRequest(
                    "suggestion is unpublished; pass the edited text as `text`".into(),
                ))
            }
        };
        Ok(diff_view(
            &suggestion.generated_text,
            &edited,
            &self.stopwords,
            &self.config.metric.preprocessing,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterRequest {
    pub name: String,
    /// `mock` or a backend base URL.
    pub endpoint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShutdownRequest {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestRequest {
    pub story_id: String,
    pub scene_index: usize,
    pub entry_index: usize,
    pub model: String,
    #[serde(default)]
    pub config: GenerationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishRequest {
    pub suggestion_id: u64,
    pub final_text: String,
    pub ratings: Ratings,
    #[serde(default)]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordView {
    pub suggestion: SuggestionRecord,
    pub published: Option<PublishedRecord>,
}

#[derive(Debug, Deserialize)]
struct DashboardQuery {
    model: Option<String>,
    sort: Option<String>,
}

#[derive(Debug, Deserialize)]
struct DiffQuery {
    text: Option<String>,
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ServiceError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ServiceError::InvalidRequest(format!("{path}: {}", e.into_inner()))
    })
}

type Shared = State<Arc<AppState>>;

async fn health() -> &'static str {
    "ok"
}

async fn list_models(State(s): Shared) -> Result<Json<Vec<BackendDescriptor>>, ServiceError> {
    Ok(Json(s.models()?))
}

async fn register(State(s): Shared, body: Bytes) -> Result<Json<BackendDescriptor>, ServiceError> {
    let req: RegisterRequest = parse(&body)?;
    Ok(Json(s.register(&req.name, &req.endpoint).await?))
}

async fn shutdown_model(State(s): Shared, body: Bytes) -> Result<Json<BackendDescriptor>, ServiceError> {
    let req: ShutdownRequest = parse(&body)?;
    Ok(Json(s.shutdown_model(&req.name).await?))
}

async fn add_story(State(s): Shared, body: Bytes) -> Result<Json<serde_json::Value>, ServiceError> {
    let text = std::str::from_utf8(&body).map_err(|e| ServiceError::InvalidRequest(e.to_string()))?;
    let id = s.add_story(text)?;
    Ok(Json(serde_json::json!({ "id": id })))
}

async fn list_stories(State(s): Shared) -> Result<Json<Vec<String>>, ServiceError> {
    let mut ids: Vec<String> = s.stories.read().map_err(poisoned)?.keys().cloned().collect();
    ids.sort();
    Ok(Json(ids))
}

async fn suggest(State(s): Shared, body: Bytes) -> Result<Json<SuggestionRecord>, ServiceError> {
    let req: SuggestRequest = parse(&body)?;
    Ok(Json(s.suggest(&req).await?))
}

async fn publish(State(s): Shared, body: Bytes) -> Result<Json<PublishedRecord>, ServiceError> {
    let req: PublishRequest = parse(&body)?;
    Ok(Json(s.publish(&req)?))
}

async fn get_dashboard(State(s): Shared, Query(q): Query<DashboardQuery>) -> Result<Json<DashboardSummary>, ServiceError> {
    let sort = match q.sort.as_deref() {
        None | Some("") => SortKey::Model,
        Some(k) => k.parse().map_err(ServiceError::InvalidRequest)?,
    };
    Ok(Json(s.dashboard(&DashboardFilter {
        model: q.model.filter(|m| !m.is_empty()),
        sort,
    })))
}

async fn get_record(State(s): Shared, Path(id): Path<u64>) -> Result<Json<RecordView>, ServiceError> {
    let suggestion = s.store.suggestion(id).ok_or(ServiceError::UnknownSuggestion(id))?;
    Ok(Json(RecordView {
        suggestion,
        published: s.store.published(id),
    }))
}

async fn get_diff(
    State(s): Shared,
    Path(id): Path<u64>,
    Query(q): Query<DiffQuery>,
) -> Result<Json<Vec<DiffSpan>>, ServiceError> {
    Ok(Json(s.diff(id, q.text.as_deref())?))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/models", get(list_models))
        .route("/models/register", post(register))
        .route("/models/shutdown", post(shutdown_model))
        .route("/stories", get(list_stories).post(add_story))
        .route("/suggest", post(suggest))
        .route("/publish", post(publish))
        .route("/dashboard", get(get_dashboard))
        .route("/records/{id}", get(get_record))
        .route("/diff/{id}", get(get_diff))
        .with_state(state)
}

/// Serves the frontend until the process is interrupted.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
