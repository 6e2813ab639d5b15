use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{CardKind, DatasetError, Story};
use crate::text::{tokenize, TokenizerMode};

const TOKEN_BIN_WIDTH: u64 = 10;
const COUNT_BIN_WIDTH: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature: String,
    /// Number of samples (stories, scenes, entries, ... depending on the feature).
    pub count: u64,
    pub total: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub feature: String,
    pub bin_width: u64,
    /// `bins[i]` counts samples in `[i * bin_width, (i + 1) * bin_width)`.
    pub bins: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub stories: u64,
    pub features: Vec<FeatureStats>,
    /// Distinct STATS tokens over all entry texts.
    pub unique_tokens: u64,
    pub histograms: Vec<Histogram>,
}

impl DatasetStats {
    pub fn feature(&self, name: &str) -> Option<&FeatureStats> {
        self.features.iter().find(|f| f.feature == name)
    }

    pub fn histogram(&self, name: &str) -> Option<&Histogram> {
        self.histograms.iter().find(|h| h.feature == name)
    }
}

fn summarize(feature: &str, samples: &[u64]) -> FeatureStats {
    let n = samples.len() as u128;
    let sum: u128 = samples.iter().map(|&x| u128::from(x)).sum();
    let sum_sq: u128 = samples.iter().map(|&x| u128::from(x) * u128::from(x)).sum();
    let (mean, std_dev) = if n == 0 {
        (0.0, 0.0)
    } else {
        // Exact integer numerator so the result is independent of sample order.
        let var_num = n * sum_sq - sum * sum;
        (sum as f64 / n as f64, ((var_num as f64) / (n * n) as f64).sqrt())
    };
    FeatureStats {
        feature: feature.to_string(),
        count: n as u64,
        total: sum as u64,
        mean,
        std_dev,
    }
}

fn histogram(feature: &str, samples: &[u64], bin_width: u64) -> Histogram {
    let mut bins = vec![0u64; samples.iter().max().map_or(0, |&m| (m / bin_width) as usize + 1)];
    for &x in samples {
        bins[(x / bin_width) as usize] += 1;
    }
    Histogram {
        feature: feature.to_string(),
        bin_width,
        bins,
    }
}

fn count_tokens(text: &str) -> u64 {
    tokenize(text, TokenizerMode::Stats).len() as u64
}

/// Corpus statistics with STATS tokenization for every token count.
pub fn compute_stats(corpus: &[Story]) -> Result<DatasetStats, DatasetError> {
    if corpus.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    // feature -> (samples, bin width); BTreeMap keeps the output order fixed.
    let mut samples: BTreeMap<String, (Vec<u64>, u64)> = BTreeMap::new();
    let mut add = |feature: String, value: u64, width: u64| {
        samples.entry(feature).or_insert_with(|| (Vec::new(), width)).0.push(value);
    };
    let mut vocabulary: HashSet<String> = HashSet::new();

    for story in corpus {
        add("scenes_per_story".into(), story.scenes.len() as u64, COUNT_BIN_WIDTH);
        add("cards_per_story".into(), story.cards.len() as u64, COUNT_BIN_WIDTH);
        for ch in &story.characters {
            add(
                "tokens_per_character_description".into(),
                count_tokens(&ch.description),
                TOKEN_BIN_WIDTH,
            );
        }
        for card in &story.cards {
            add(
                format!("tokens_per_card_{}", card.kind.label()),
                count_tokens(&card.title) + count_tokens(&card.description),
                TOKEN_BIN_WIDTH,
            );
        }
        for scene in &story.scenes {
            add("entries_per_scene".into(), scene.entries.len() as u64, COUNT_BIN_WIDTH);
            for entry in &scene.entries {
                let tokens = tokenize(&entry.text, TokenizerMode::Stats);
                add("tokens_per_entry".into(), tokens.len() as u64, TOKEN_BIN_WIDTH);
                vocabulary.extend(tokens.into_tokens());
                add(
                    "played_cards_per_entry".into(),
                    entry.cards_played.len() as u64,
                    COUNT_BIN_WIDTH,
                );
                for kind in CardKind::ALL {
                    let n = entry
                        .cards_played
                        .iter()
                        .filter(|id| story.card(id).is_some_and(|c| c.kind == kind))
                        .count();
                    add(format!("played_{}_per_entry", kind.label()), n as u64, COUNT_BIN_WIDTH);
                }
            }
        }
    }

    Ok(DatasetStats {
        stories: corpus.len() as u64,
        features: samples.iter().map(|(f, (s, _))| summarize(f, s)).collect(),
        unique_tokens: vocabulary.len() as u64,
        histograms: samples.iter().map(|(f, (s, w))| histogram(f, s, *w)).collect(),
    })
}
