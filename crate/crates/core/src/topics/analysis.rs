use std::collections::{BTreeMap, HashMap};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{argmax, encode_raw, topic_weights, EmbeddingLexicon, TopicError};
use crate::dataset::Story;

/// The `k` lexicon words closest to topic `row` by cosine similarity.
/// Ties are broken by word order.
pub fn nearest_words(
    r: &Array2<f64>,
    row: usize,
    lexicon: &EmbeddingLexicon,
    k: usize,
) -> Result<Vec<(String, f64)>, TopicError> {
    if row >= r.nrows() {
        return Err(TopicError::RowOutOfRange { row, rows: r.nrows() });
    }
    if r.ncols() != lexicon.dim() {
        return Err(TopicError::DimensionMismatch {
            expected: r.ncols(),
            found: lexicon.dim(),
        });
    }
    let t = r.row(row);
    let tn = t.dot(&t).sqrt();
    let mut scored: Vec<(String, f64)> = lexicon
        .words()
        .iter()
        .zip(lexicon.vectors().rows())
        .map(|(w, v)| {
            let denom = tn * v.dot(&v).sqrt();
            let cos = if denom > 0.0 { t.dot(&v) / denom } else { 0.0 };
            (w.clone(), cos)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: usize,
    pub to: usize,
    pub probability: f64,
}

/// Row-stochastic topic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub counts: Array2<u64>,
    pub probabilities: Array2<f64>,
}

impl TransitionMatrix {
    pub fn from_counts(counts: Array2<u64>) -> Self {
        let mut probabilities = Array2::zeros(counts.raw_dim());
        for (i, row) in counts.rows().into_iter().enumerate() {
            let total: u64 = row.sum();
            if total > 0 {
                for (j, &c) in row.iter().enumerate() {
                    probabilities[[i, j]] = c as f64 / total as f64;
                }
            }
        }
        Self { counts, probabilities }
    }

    /// True when topic `row` was never the source of a transition.
    pub fn is_empty_row(&self, row: usize) -> bool {
        self.counts.row(row).sum() == 0
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Nonzero cells in row-major order.
    pub fn records(&self) -> Vec<TransitionRecord> {
        self.probabilities
            .indexed_iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|((from, to), &probability)| TransitionRecord { from, to, probability })
            .collect()
    }
}

/// Counts argmax-topic transitions between consecutive entries of each
/// character, in story order. Entries without known words are skipped and
/// do not break a character's chain.
pub fn transition_matrix(
    stories: &[Story],
    r: &Array2<f64>,
    lexicon: &EmbeddingLexicon,
) -> Result<TransitionMatrix, TopicError> {
    let k = r.nrows();
    let mut counts = Array2::<u64>::zeros((k, k));
    for story in stories {
        let mut last: HashMap<&str, usize> = HashMap::new();
        for (_, entry) in story.entries() {
            let Some(ch) = entry.author_role.character() else {
                continue;
            };
            let x = match encode_raw(&entry.text, lexicon) {
                Ok(x) => x,
                Err(TopicError::NoKnownTokens) => continue,
                Err(e) => return Err(e),
            };
            let topic = argmax(&topic_weights(x.view(), r)?);
            if let Some(prev) = last.insert(ch, topic) {
                counts[[prev, topic]] += 1;
            }
        }
    }
    Ok(TransitionMatrix::from_counts(counts))
}

/// Mean topic weight per world minus the overall mean, over all encodable
/// entry and challenge texts. Stories without a world are counted only in
/// the overall mean.
pub fn world_relative_importance(
    stories: &[Story],
    r: &Array2<f64>,
    lexicon: &EmbeddingLexicon,
) -> Result<BTreeMap<String, Array1<f64>>, TopicError> {
    let k = r.nrows();
    let mut overall = (Array1::<f64>::zeros(k), 0usize);
    let mut worlds: BTreeMap<String, (Array1<f64>, usize)> = BTreeMap::new();
    for story in stories {
        let challenges = story
            .cards
            .iter()
            .filter(|c| c.kind == crate::dataset::CardKind::Challenge)
            .map(|c| c.text());
        let texts = story.entries().map(|(_, e)| e.text.clone()).chain(challenges);
        for text in texts {
            let x = match encode_raw(&text, lexicon) {
                Ok(x) => x,
                Err(TopicError::NoKnownTokens) => continue,
                Err(e) => return Err(e),
            };
            let w = topic_weights(x.view(), r)?;
            overall.0 += &w;
            overall.1 += 1;
            if let Some(world) = &story.world {
                let acc = worlds.entry(world.clone()).or_insert_with(|| (Array1::zeros(k), 0));
                acc.0 += &w;
                acc.1 += 1;
            }
        }
    }
    if overall.1 == 0 {
        return Ok(BTreeMap::new());
    }
    let mean = overall.0 / overall.1 as f64;
    Ok(worlds
        .into_iter()
        .map(|(world, (sum, n))| (world, sum / n as f64 - &mean))
        .collect())
}
