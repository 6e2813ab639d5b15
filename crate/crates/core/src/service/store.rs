use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{GenerationConfig, ServiceError};
use crate::metrics::{MatchSpan, ScoreSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionRecord {
    pub id: u64,
    pub model: String,
    pub story_id: String,
    pub scene_index: usize,
    pub entry_index: usize,
    /// SHA-256 of the packed context tokens.
    pub context_digest: String,
    pub context_length: usize,
    /// Generated text after sentence truncation.
    pub generated_text: String,
    pub config: GenerationConfig,
    pub timestamp_ms: u64,
}

/// Likert ratings, each in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ratings {
    pub relevance: i64,
    pub fluency: i64,
    pub coherence: i64,
    pub likability: i64,
}

impl Ratings {
    pub const FIELDS: [&'static str; 4] = ["relevance", "fluency", "coherence", "likability"];

    pub fn values(&self) -> [i64; 4] {
        [self.relevance, self.fluency, self.coherence, self.likability]
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        for (field, value) in Self::FIELDS.into_iter().zip(self.values()) {
            if !(1..=5).contains(&value) {
                return Err(ServiceError::RatingOutOfRange { field, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredScores {
    pub user: ScoreSummary,
    pub rouge_l: ScoreSummary,
    pub rouge_w: ScoreSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRecord {
    pub suggestion_id: u64,
    pub model: String,
    pub final_text: String,
    pub ratings: Ratings,
    pub comment: Option<String>,
    pub scores: StoredScores,
    pub spans: Vec<MatchSpan>,
    pub timestamp_ms: u64,
}

/// One line of the record log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    Suggestion(SuggestionRecord),
    Published(PublishedRecord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReplayReport {
    pub suggestions: usize,
    pub published: usize,
    /// Bytes of a torn final line dropped during recovery.
    pub truncated_bytes: u64,
}

#[derive(Debug, Default)]
struct StoreState {
    next_id: u64,
    suggestions: BTreeMap<u64, SuggestionRecord>,
    published: BTreeMap<u64, PublishedRecord>,
}

impl StoreState {
    fn apply(&mut self, event: LogEvent) -> Result<(), String> {
        match event {
            LogEvent::Suggestion(s) => {
                if self.suggestions.contains_key(&s.id) {
                    return Err(format!("duplicate suggestion id {}", s.id));
                }
                self.next_id = self.next_id.max(s.id + 1);
                self.suggestions.insert(s.id, s);
            }
            LogEvent::Published(p) => {
                if !self.suggestions.contains_key(&p.suggestion_id) {
                    return Err(format!("publication for unknown suggestion {}", p.suggestion_id));
                }
                if self.published.contains_key(&p.suggestion_id) {
                    return Err(format!("suggestion {} published twice", p.suggestion_id));
                }
                self.published.insert(p.suggestion_id, p);
            }
        }
        Ok(())
    }
}

/// Append-only JSON-lines record log with in-memory indexes.
///
/// Writers are serialized by one mutex and each record is written as a
/// single `write` of a complete line, so readers of the file only ever see
/// whole records plus at most one torn final line after a crash.
#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    writer: Mutex<File>,
    state: RwLock<StoreState>,
}

fn storage(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Storage(e.to_string())
}

pub(crate) fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl RecordStore {
    /// Opens or creates the log and replays it. A torn last line is cut off.
    pub fn open(path: &Path) -> Result<(Self, ReplayReport), ServiceError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(storage)?;
        }
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(storage(e)),
        };
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let truncated = (bytes.len() - complete) as u64;

        let mut state = StoreState::default();
        let mut report = ReplayReport {
            truncated_bytes: truncated,
            ..ReplayReport::default()
        };
        for (n, line) in bytes[..complete].split(|&b| b == b'\n').enumerate() {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let event: LogEvent = serde_json::from_slice(line)
                .map_err(|e| storage(format!("{} line {}: {e}", path.display(), n + 1)))?;
            match &event {
                LogEvent::Suggestion(_) => report.suggestions += 1,
                LogEvent::Published(_) => report.published += 1,
            }
            state
                .apply(event)
                .map_err(|e| storage(format!("{} line {}: {e}", path.display(), n + 1)))?;
        }

        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(storage)?;
        if truncated > 0 {
            tracing::warn!(bytes = truncated, "dropping torn record at end of log");
            file.set_len(complete as u64).map_err(storage)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                writer: Mutex::new(file),
                state: RwLock::new(state),
            },
            report,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn write_line(file: &mut File, event: &LogEvent) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(event).map_err(storage)?;
        line.push(b'\n');
        file.write_all(&line).map_err(storage)?;
        file.flush().map_err(storage)
    }

    /// Assigns the next id, persists the record built by `make`, and returns it.
    pub fn append_suggestion(&self, make: impl FnOnce(u64) -> SuggestionRecord) -> Result<SuggestionRecord, ServiceError> {
        let mut file = self.writer.lock().map_err(storage)?;
        let id = self.state.read().map_err(storage)?.next_id;
        let record = make(id);
        if record.id != id {
            return Err(storage("suggestion record must keep its assigned id"));
        }
        let event = LogEvent::Suggestion(record.clone());
        Self::write_line(&mut file, &event)?;
        self.state.write().map_err(storage)?.apply(event).map_err(storage)?;
        Ok(record)
    }

    /// Persists a publication after checking the suggestion exists and is unpublished.
    pub fn publish(&self, record: PublishedRecord) -> Result<PublishedRecord, ServiceError> {
        let mut file = self.writer.lock().map_err(storage)?;
        {
            let state = self.state.read().map_err(storage)?;
            if !state.suggestions.contains_key(&record.suggestion_id) {
                return Err(ServiceError::UnknownSuggestion(record.suggestion_id));
            }
            if state.published.contains_key(&record.suggestion_id) {
                return Err(ServiceError::AlreadyPublished(record.suggestion_id));
            }
        }
        let event = LogEvent::Published(record.clone());
        Self::write_line(&mut file, &event)?;
        self.state.write().map_err(storage)?.apply(event).map_err(storage)?;
        Ok(record)
    }

    pub fn suggestion(&self, id: u64) -> Option<SuggestionRecord> {
        self.state.read().ok()?.suggestions.get(&id).cloned()
    }

    pub fn published(&self, id: u64) -> Option<PublishedRecord> {
        self.state.read().ok()?.published.get(&id).cloned()
    }

    /// All records in id order.
    pub fn snapshot(&self) -> (Vec<SuggestionRecord>, Vec<PublishedRecord>) {
        let state = self.state.read().expect("store lock poisoned");
        (
            state.suggestions.values().cloned().collect(),
            state.published.values().cloned().collect(),
        )
    }
}
