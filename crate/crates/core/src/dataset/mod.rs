//! Story schema and corpus tooling.
//!
//! A story is one JSON document stored as `stories/<id>.story`. Unknown
//! fields are rejected so that typos surface as errors instead of silently
//! dropped data.

mod example;
mod split;
mod stats;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use example::{build_generation_example, generation_separators, GenerationExample};
pub use split::{split_corpus, story_token_count, Split, SplitAssignment};
pub use stats::{compute_stats, DatasetStats, FeatureStats, Histogram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("dangling reference at `{path}`: no such id `{id}`")]
    DanglingReference { path: String, id: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("need at least 3 stories to split, got {0}")]
    TooFewStories(usize),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("entry `{0}` is written by the narrator and cannot be a generation target")]
    NarratorTarget(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CardKind {
    Strength,
    Weakness,
    Item,
    Goal,
    Location,
    Challenge,
}

impl CardKind {
    pub const ALL: [CardKind; 6] = [
        CardKind::Strength,
        CardKind::Weakness,
        CardKind::Item,
        CardKind::Goal,
        CardKind::Location,
        CardKind::Challenge,
    ];

    /// Lowercase name, also used as the card's segment label.
    pub fn label(self) -> &'static str {
        match self {
            CardKind::Strength => "strength",
            CardKind::Weakness => "weakness",
            CardKind::Item => "item",
            CardKind::Goal => "goal",
            CardKind::Location => "location",
            CardKind::Challenge => "challenge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Card {
    pub id: String,
    pub kind: CardKind,
    #[serde(default)]
    pub is_wild: bool,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
}

impl Card {
    /// Title and description joined by a newline, or whichever is present.
    pub fn text(&self) -> String {
        match (self.title.is_empty(), self.description.is_empty()) {
            (false, false) => format!("{}\n{}", self.title, self.description),
            (false, true) => self.title.clone(),
            _ => self.description.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Character {
    pub id: String,
    pub name: String,
    /// Biography.
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub player_id: Option<String>,
}

/// Who wrote an entry: `"narrator"` or `{"character": "<id>"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthorRole {
    Narrator,
    Character(String),
}

impl AuthorRole {
    pub fn character(&self) -> Option<&str> {
        match self {
            AuthorRole::Narrator => None,
            AuthorRole::Character(id) => Some(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub id: String,
    pub author_role: AuthorRole,
    pub text: String,
    #[serde(default)]
    pub cards_played: Vec<String>,
    #[serde(default)]
    pub challenge_id: Option<String>,
    pub ordinal: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub id: String,
    #[serde(default)]
    pub intro: String,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Story {
    pub id: String,
    #[serde(default)]
    pub world: Option<String>,
    #[serde(default)]
    pub completed: bool,
    #[serde(default)]
    pub characters: Vec<Character>,
    #[serde(default)]
    pub cards: Vec<Card>,
    pub scenes: Vec<Scene>,
}

impl Story {
    pub fn card(&self, id: &str) -> Option<&Card> {
        self.cards.iter().find(|c| c.id == id)
    }

    pub fn character(&self, id: &str) -> Option<&Character> {
        self.characters.iter().find(|c| c.id == id)
    }

    /// All entries in story order with their scene index.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &Entry)> {
        self.scenes
            .iter()
            .enumerate()
            .flat_map(|(s, scene)| scene.entries.iter().map(move |e| (s, e)))
    }

    /// Checks the invariants serde cannot express.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let violation = |path: String, message: &str| DatasetError::SchemaViolation {
            path,
            message: message.to_string(),
        };
        if self.id.is_empty() {
            return Err(violation("id".into(), "must be nonempty"));
        }
        let mut seen = HashSet::new();
        for (i, c) in self.characters.iter().enumerate() {
            if c.id.is_empty() || !seen.insert(c.id.as_str()) {
                return Err(violation(format!("characters[{i}].id"), "must be nonempty and unique"));
            }
        }
        let mut seen = HashSet::new();
        for (i, c) in self.cards.iter().enumerate() {
            if c.id.is_empty() || !seen.insert(c.id.as_str()) {
                return Err(violation(format!("cards[{i}].id"), "must be nonempty and unique"));
            }
            if !c.is_wild && c.title.trim().is_empty() {
                return Err(violation(format!("cards[{i}].title"), "must be nonempty for non-wild cards"));
            }
        }
        let mut seen = HashSet::new();
        for (s, scene) in self.scenes.iter().enumerate() {
            if scene.id.is_empty() {
                return Err(violation(format!("scenes[{s}].id"), "must be nonempty"));
            }
            for (e, entry) in scene.entries.iter().enumerate() {
                let path = format!("scenes[{s}].entries[{e}]");
                if entry.id.is_empty() || !seen.insert(entry.id.as_str()) {
                    return Err(violation(format!("{path}.id"), "must be nonempty and unique"));
                }
                if entry.ordinal as usize != e {
                    return Err(violation(
                        format!("{path}.ordinal"),
                        "ordinals must run 0, 1, 2, ... in entry order",
                    ));
                }
                if let AuthorRole::Character(id) = &entry.author_role {
                    if self.character(id).is_none() {
                        return Err(DatasetError::DanglingReference {
                            path: format!("{path}.author_role.character"),
                            id: id.clone(),
                        });
                    }
                }
                for (k, id) in entry.cards_played.iter().enumerate() {
                    if self.card(id).is_none() {
                        return Err(DatasetError::DanglingReference {
                            path: format!("{path}.cards_played[{k}]"),
                            id: id.clone(),
                        });
                    }
                }
                if let Some(id) = &entry.challenge_id {
                    if self.card(id).is_none() {
                        return Err(DatasetError::DanglingReference {
                            path: format!("{path}.challenge_id"),
                            id: id.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates one story document.
pub fn load_story(document: &str) -> Result<Story, DatasetError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let story: Story = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        DatasetError::SchemaViolation {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    story.validate()?;
    Ok(story)
}

/// Canonical serialized form of a story.
pub fn save_story(story: &Story) -> String {
    serde_json::to_string_pretty(story).expect("story serializes")
}

/// Loads every `stories/*.story` file under `root`, sorted by file name.
///
/// Each story's id must match its file stem.
pub fn load_corpus(root: &Path) -> Result<Vec<Story>, DatasetError> {
    let dir = root.join("stories");
    let io = |e: std::io::Error| DatasetError::Io(format!("{}: {e}", dir.display()));
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .map_err(io)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "story"))
        .collect();
    paths.sort();
    let mut stories = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
        let story = load_story(&text).map_err(|e| match e {
            DatasetError::SchemaViolation { path: p, message } => DatasetError::SchemaViolation {
                path: p,
                message: format!("{message} (in {})", path.display()),
            },
            other => other,
        })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        if stem != story.id {
            return Err(DatasetError::SchemaViolation {
                path: "id".into(),
                message: format!("story id `{}` does not match file {}", story.id, path.display()),
            });
        }
        stories.push(story);
    }
    Ok(stories)
}

/// Writes stories as `root/stories/<id>.story`.
pub fn write_corpus(root: &Path, stories: &[Story]) -> Result<(), DatasetError> {
    let dir = root.join("stories");
    let io = |e: std::io::Error| DatasetError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(&dir).map_err(io)?;
    for story in stories {
        std::fs::write(dir.join(format!("{}.story", story.id)), save_story(story)).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn entry(id: &str, author: Option<&str>, text: &str, ordinal: u32) -> Entry {
        Entry {
            id: id.into(),
            author_role: author.map_or(AuthorRole::Narrator, |a| AuthorRole::Character(a.into())),
            text: text.into(),
            cards_played: vec![],
            challenge_id: None,
            ordinal,
        }
    }

    pub fn character(id: &str, bio: &str) -> Character {
        Character {
            id: id.into(),
            name: id.to_uppercase(),
            description: bio.into(),
            player_id: None,
        }
    }

    pub fn card(id: &str, kind: CardKind, title: &str, description: &str) -> Card {
        Card {
            id: id.into(),
            kind,
            is_wild: false,
            title: title.into(),
            description: description.into(),
        }
    }

    pub fn story(id: &str, scenes: Vec<Vec<Entry>>) -> Story {
        Story {
            id: id.into(),
            world: None,
            completed: true,
            characters: vec![character("c1", "A sailor."), character("c2", "A thief.")],
            cards: vec![],
            scenes: scenes
                .into_iter()
                .enumerate()
                .map(|(i, entries)| Scene {
                    id: format!("s{i}"),
                    intro: format!("Scene {i} begins."),
                    entries,
                })
                .collect(),
        }
    }
}
