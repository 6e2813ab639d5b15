use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PublishedRecord, Ratings, SuggestionRecord};
use crate::metrics::{pearson_r, ScoreSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    #[default]
    Model,
    Suggestions,
    Published,
    Relevance,
    Fluency,
    Coherence,
    Likability,
    User,
    RougeL,
    RougeW,
}

impl FromStr for SortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown sort key `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DashboardFilter {
    pub model: Option<String>,
    #[serde(default)]
    pub sort: SortKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRatings {
    pub relevance: f64,
    pub fluency: f64,
    pub coherence: f64,
    pub likability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanScores {
    pub user: ScoreSummary,
    pub rouge_l: ScoreSummary,
    pub rouge_w: ScoreSummary,
}

/// Pearson r between two per-record series; `r` is null when undefined
/// (fewer than two records or a constant series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub x: String,
    pub y: String,
    pub r: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub suggestion_id: u64,
    pub comment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub suggestions: u64,
    pub published: u64,
    /// Null until something is published.
    pub mean_ratings: Option<MeanRatings>,
    pub mean_scores: Option<MeanScores>,
    /// Metric precisions against ratings, then rating pairs.
    pub correlations: Vec<CorrelationCell>,
    pub comments: Vec<Comment>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DashboardSummary {
    pub models: Vec<ModelSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn mean_summary(items: &[&PublishedRecord], pick: impl Fn(&PublishedRecord) -> ScoreSummary) -> ScoreSummary {
    ScoreSummary {
        precision: mean(items.iter().map(|p| pick(p).precision)),
        recall: mean(items.iter().map(|p| pick(p).recall)),
        f1: mean(items.iter().map(|p| pick(p).f1)),
    }
}

fn summarize(model: &str, suggestions: u64, published: &[&PublishedRecord]) -> ModelSummary {
    let mut summary = ModelSummary {
        model: model.to_string(),
        suggestions,
        published: published.len() as u64,
        mean_ratings: None,
        mean_scores: None,
        correlations: Vec::new(),
        comments: published
            .iter()
            .filter_map(|p| {
                p.comment.as_ref().map(|c| Comment {
                    suggestion_id: p.suggestion_id,
                    comment: c.clone(),
                })
            })
            .collect(),
    };
    if published.is_empty() {
        return summary;
    }
    let rating = |i: usize| -> Vec<f64> { published.iter().map(|p| p.ratings.values()[i] as f64).collect() };
    let ratings: Vec<Vec<f64>> = (0..4).map(rating).collect();
    summary.mean_ratings = Some(MeanRatings {
        relevance: mean(ratings[0].iter().copied()),
        fluency: mean(ratings[1].iter().copied()),
        coherence: mean(ratings[2].iter().copied()),
        likability: mean(ratings[3].iter().copied()),
    });
    summary.mean_scores = Some(MeanScores {
        user: mean_summary(published, |p| p.scores.user),
        rouge_l: mean_summary(published, |p| p.scores.rouge_l),
        rouge_w: mean_summary(published, |p| p.scores.rouge_w),
    });
    let metrics: [(&str, Vec<f64>); 3] = [
        ("user", published.iter().map(|p| p.scores.user.precision).collect()),
        ("rouge_l", published.iter().map(|p| p.scores.rouge_l.precision).collect()),
        ("rouge_w", published.iter().map(|p| p.scores.rouge_w.precision).collect()),
    ];
    let cell = |x: &str, a: &[f64], y: &str, b: &[f64]| CorrelationCell {
        x: x.to_string(),
        y: y.to_string(),
        r: pearson_r(a, b).ok().map(|c| c.r),
        n: a.len(),
    };
    for (name, series) in &metrics {
        for (i, field) in Ratings::FIELDS.iter().enumerate() {
            summary.correlations.push(cell(name, series, field, &ratings[i]));
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            summary
                .correlations
                .push(cell(Ratings::FIELDS[i], &ratings[i], Ratings::FIELDS[j], &ratings[j]));
        }
    }
    summary
}

fn sort_value(m: &ModelSummary, key: SortKey) -> Option<f64> {
    let r = m.mean_ratings.as_ref();
    let s = m.mean_scores.as_ref();
    match key {
        SortKey::Model => None,
        SortKey::Suggestions => Some(m.suggestions as f64),
        SortKey::Published => Some(m.published as f64),
        SortKey::Relevance => r.map(|r| r.relevance),
        SortKey::Fluency => r.map(|r| r.fluency),
        SortKey::Coherence => r.map(|r| r.coherence),
        SortKey::Likability => r.map(|r| r.likability),
        SortKey::User => s.map(|s| s.user.precision),
        SortKey::RougeL => s.map(|s| s.rouge_l.precision),
        SortKey::RougeW => s.map(|s| s.rouge_w.precision),
    }
}

/// Per-model aggregates over the record log.
///
/// Models are sorted by name, or by the chosen column descending with
/// missing values last and ties broken by name.
pub fn dashboard(
    suggestions: &[SuggestionRecord],
    published: &[PublishedRecord],
    filter: &DashboardFilter,
) -> DashboardSummary {
    let keep = |m: &str| filter.model.as_deref().is_none_or(|f| f == m);
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in suggestions.iter().filter(|s| keep(&s.model)) {
        *counts.entry(&s.model).or_default() += 1;
    }
    let mut by_model: BTreeMap<&str, Vec<&PublishedRecord>> = BTreeMap::new();
    for p in published.iter().filter(|p| keep(&p.model)) {
        by_model.entry(&p.model).or_default().push(p);
    }
    let mut models: Vec<ModelSummary> = counts
        .iter()
        .map(|(m, &n)| summarize(m, n, by_model.get(m).map_or(&[][..], Vec::as_slice)))
        .collect();
    if filter.sort != SortKey::Model {
        models.sort_by(|a, b| {
            let (va, vb) = (sort_value(a, filter.sort), sort_value(b, filter.sort));
            match (va, vb) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            }
            .then_with(|| a.model.cmp(&b.model))
        });
    }
    DashboardSummary { models }
}
