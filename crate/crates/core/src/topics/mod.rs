//! Dictionary-learning topic model over averaged word embeddings.
//!
//! A text is encoded as the mean of its words' vectors `x`. Topic weights
//! are `softmax(R x̂)` for a dictionary `R` with one row per topic, and the
//! text is reconstructed as `r = Rᵀ w`. Training pushes `r` toward `x̂` and
//! away from the encodings of randomly drawn other texts with a hinge loss,
//! plus a penalty keeping the normalized rows near orthogonal.

mod analysis;
mod train;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{tokenize, TokenizerMode};

pub use analysis::{
    nearest_words, transition_matrix, world_relative_importance, TransitionMatrix, TransitionRecord,
};
pub use train::{loss, loss_and_gradient, train, TrainOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopicError {
    #[error("no token of the text is in the lexicon")]
    NoKnownTokens,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("need at least {needed} encodable documents, found {found}")]
    TooFewDocuments { needed: usize, found: usize },
    #[error("topic row {row} out of range ({rows} rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

/// Word vectors. Words are lowercased on load; the first occurrence wins.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingLexicon {
    words: Vec<String>,
    vectors: Array2<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingLexicon {
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, TopicError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut words = Vec::new();
        let mut rows: Vec<f64> = Vec::new();
        let mut index = HashMap::new();
        let mut dim = None;
        for (word, v) in pairs {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d {
                return Err(TopicError::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            let word = word.as_ref().to_lowercase();
            if index.contains_key(&word) {
                continue;
            }
            index.insert(word.clone(), words.len());
            words.push(word);
            rows.extend(v);
        }
        let d = dim.unwrap_or(0);
        if d == 0 {
            return Err(TopicError::InvalidConfig("lexicon is empty".into()));
        }
        let vectors = Array2::from_shape_vec((words.len(), d), rows).expect("rows have width d");
        Ok(Self { words, vectors, index })
    }

    /// Parses `word v1 v2 ... vd` lines.
    pub fn parse(text: &str) -> Result<Self, TopicError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let v = fields
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| TopicError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(TopicError::Parse {
                    line: i + 1,
                    message: "expected finite vector components".into(),
                });
            }
            pairs.push((word.to_string(), v));
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self, TopicError> {
        Self::parse(&read(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (w, v) in self.words.iter().zip(self.vectors.rows()) {
            out.push_str(w);
            for x in v {
                write!(out, " {x}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn get(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.index.get(word).map(|&i| self.vectors.row(i))
    }
}

fn read(path: &Path) -> Result<String, TopicError> {
    std::fs::read_to_string(path).map_err(|e| TopicError::Io(format!("{}: {e}", path.display())))
}

/// The topic dictionary `R`, one row per topic.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryMatrix {
    r: Array2<f64>,
}

impl DictionaryMatrix {
    pub fn new(r: Array2<f64>) -> Result<Self, TopicError> {
        if r.nrows() < 2 {
            return Err(TopicError::InvalidConfig("need at least 2 topics".into()));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(TopicError::InvalidConfig("dictionary has non-finite entries".into()));
        }
        Ok(Self { r })
    }

    pub fn topics(&self) -> usize {
        self.r.nrows()
    }

    pub fn dim(&self) -> usize {
        self.r.ncols()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.r
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.r
    }

    /// Header `K d`, then one row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.topics(), self.dim());
        for row in self.r.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TopicError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, message: String| TopicError::Parse { line: line + 1, message };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing `K d` header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(hl, format!("bad header: {e}")))?;
        let [k, d] = dims[..] else {
            return Err(parse_err(hl, "header must be `K d`".into()));
        };
        let mut data = Vec::with_capacity(k * d);
        let mut rows = 0;
        for (i, line) in lines {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| parse_err(i, format!("{e}")))?;
            if row.len() != d {
                return Err(parse_err(i, format!("expected {d} values, found {}", row.len())));
            }
            data.extend(row);
            rows += 1;
        }
        if rows != k {
            return Err(parse_err(hl, format!("header says {k} rows, found {rows}")));
        }
        Self::new(Array2::from_shape_vec((k, d), data).expect("checked shape"))
    }

    pub fn load(path: &Path) -> Result<Self, TopicError> {
        Self::parse(&read(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicModelConfig {
    pub topics: usize,
    pub margin: f64,
    pub negatives: usize,
    pub ortho_weight: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TopicModelConfig {
    fn default() -> Self {
        Self {
            topics: 50,
            margin: 1.0,
            negatives: 5,
            ortho_weight: 1e-3,
            learning_rate: 0.005,
            epochs: 10,
            seed: 0,
        }
    }
}

impl TopicModelConfig {
    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |m: &str| Err(TopicError::InvalidConfig(m.into()));
        if self.topics < 2 {
            return bad("topics must be at least 2");
        }
        if self.negatives == 0 {
            return bad("negatives must be positive");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad("margin must be positive");
        }
        if !(self.ortho_weight >= 0.0 && self.ortho_weight.is_finite()) {
            return bad("ortho_weight must be non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// Mean of the vectors of in-lexicon tokens.
pub fn encode_text<S: AsRef<str>>(tokens: &[S], lexicon: &EmbeddingLexicon) -> Result<Array1<f64>, TopicError> {
    let mut sum = Array1::zeros(lexicon.dim());
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = lexicon.get(t.as_ref()) {
            sum += &v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(TopicError::NoKnownTokens);
    }
    Ok(sum / n as f64)
}

/// Tokenizes raw text the way the lexicon expects (lowercased words) and encodes it.
pub fn encode_raw(text: &str, lexicon: &EmbeddingLexicon) -> Result<Array1<f64>, TopicError> {
    encode_text(&tokenize(text, TokenizerMode::Metric), lexicon)
}

fn check_dim(r: &Array2<f64>, x: ArrayView1<'_, f64>) -> Result<(), TopicError> {
    if r.ncols() != x.len() {
        return Err(TopicError::DimensionMismatch {
            expected: r.ncols(),
            found: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn softmax(z: &Array1<f64>) -> Array1<f64> {
    let max = z.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let e = z.mapv(|v| (v - max).exp());
    let s = e.sum();
    e / s
}

/// `softmax(R · x)`.
pub fn topic_weights(x: ArrayView1<'_, f64>, r: &Array2<f64>) -> Result<Array1<f64>, TopicError> {
    check_dim(r, x)?;
    Ok(softmax(&r.dot(&x)))
}

/// `Rᵀ · weights`.
pub fn reconstruct(weights: ArrayView1<'_, f64>, r: &Array2<f64>) -> Result<Array1<f64>, TopicError> {
    if weights.len() != r.nrows() {
        return Err(TopicError::DimensionMismatch {
            expected: r.nrows(),
            found: weights.len(),
        });
    }
    Ok(r.t().dot(&weights))
}

pub(crate) fn argmax(v: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn normalized(v: ArrayView1<'_, f64>) -> Result<Array1<f64>, TopicError> {
    let n = v.dot(&v).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(TopicError::ZeroVector);
    }
    Ok(v.to_owned() / n)
}
