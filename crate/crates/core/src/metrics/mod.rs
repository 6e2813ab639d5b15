//! Edit-overlap metrics and agreement statistics.
//!
//! [`user_score`] counts generated tokens that survive into the published
//! text as contiguous runs containing at least one non-stopword. ROUGE-L and
//! ROUGE-W are provided as reference points, plus Pearson's r and Fleiss'
//! kappa for rating analysis.

mod agreement;
mod diff;
mod rouge;
mod user;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agreement::{fleiss_kappa, pearson_r, Correlation, RatingsMatrix};
pub use diff::{diff_view, DiffClass, DiffSpan};
pub use rouge::{lcs_length, rouge_l, rouge_w, DEFAULT_ROUGE_W_ALPHA};
pub use user::{longest_common_substring, user_matches, user_score};

use crate::text::{Preprocessing, StopwordList, TokenSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("empty input: {0} sequence has no tokens")]
    EmptyInput(&'static str),
    #[error("invalid ROUGE-W exponent {0}: must be > 1")]
    InvalidAlpha(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("row {row} has {found} ratings, expected {expected}")]
    InconsistentRaterCount {
        row: usize,
        expected: u64,
        found: u64,
    },
}

/// A contiguous run shared by the generated (`x`) and published (`y`)
/// sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchSpan {
    pub start_x: usize,
    pub start_y: usize,
    pub length: usize,
    /// Whether the run contains at least one non-stopword.
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditMetricReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched_tokens: usize,
    #[serde(default)]
    pub spans: Vec<MatchSpan>,
}

impl EditMetricReport {
    fn new(precision: f64, recall: f64, matched_tokens: usize, spans: Vec<MatchSpan>) -> Self {
        Self {
            precision,
            recall,
            f1: f1(precision, recall),
            matched_tokens,
            spans,
        }
    }

    pub fn summary(&self) -> ScoreSummary {
        ScoreSummary {
            precision: self.precision,
            recall: self.recall,
            f1: self.f1,
        }
    }
}

/// Precision/recall/F1 without match evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Settings shared by batch scoring and the service.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    #[serde(default)]
    pub preprocessing: Preprocessing,
    /// ROUGE-W weighting exponent.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Drop stopwords from both sides before ROUGE-L/ROUGE-W.
    #[serde(default)]
    pub rouge_remove_stopwords: bool,
    /// Drop stopwords before USER matching instead of only when counting.
    #[serde(default)]
    pub user_remove_stopwords: bool,
}

fn default_alpha() -> f64 {
    DEFAULT_ROUGE_W_ALPHA
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            preprocessing: Preprocessing::default(),
            alpha: DEFAULT_ROUGE_W_ALPHA,
            rouge_remove_stopwords: false,
            user_remove_stopwords: false,
        }
    }
}

/// The three metrics for one generated/published pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub user: ScoreSummary,
    pub rouge_l: ScoreSummary,
    pub rouge_w: ScoreSummary,
    pub matched_tokens: usize,
    pub spans: Vec<MatchSpan>,
}

fn strip(seq: &TokenSequence, stopwords: &StopwordList) -> TokenSequence {
    TokenSequence::from_tokens(
        seq.iter().filter(|t| !stopwords.contains(t)).cloned(),
        seq.mode(),
    )
}

/// Scores a generated text against its published edit.
pub fn score_pair(
    generated: &str,
    published: &str,
    config: &MetricConfig,
    stopwords: &StopwordList,
) -> Result<PairScores, MetricError> {
    let x = config.preprocessing.apply(generated);
    let y = config.preprocessing.apply(published);

    let user = if config.user_remove_stopwords {
        if x.is_empty() || y.is_empty() {
            user_score(&x, &y, stopwords)?;
        }
        let (xs, ys) = (strip(&x, stopwords), strip(&y, stopwords));
        if xs.is_empty() || ys.is_empty() {
            EditMetricReport::new(0.0, 0.0, 0, Vec::new())
        } else {
            user_score(&xs, &ys, stopwords)?
        }
    } else {
        user_score(&x, &y, stopwords)?
    };
    let filter = config.rouge_remove_stopwords.then_some(stopwords);
    let rl = rouge_l(&x, &y, filter)?;
    let rw = rouge_w(&x, &y, config.alpha, filter)?;
    Ok(PairScores {
        user: user.summary(),
        rouge_l: rl.summary(),
        rouge_w: rw.summary(),
        matched_tokens: user.matched_tokens,
        spans: user.spans,
    })
}

pub(crate) fn same<S: AsRef<str>>(a: &S, b: &S) -> bool {
    a.as_ref() == b.as_ref()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_of_zero_is_zero() {
        assert_eq!(f1(0.0, 0.0), 0.0);
        assert_eq!(f1(0.5, 0.5), 0.5);
    }

    #[test]
    fn score_pair_identity() {
        let s = score_pair(
            "Dragons circle the tower.",
            "Dragons circle the tower.",
            &MetricConfig::default(),
            &StopwordList::english(),
        )
        .unwrap();
        assert_eq!(s.user.f1, 1.0);
        assert_eq!(s.rouge_l.f1, 1.0);
        assert!((s.rouge_w.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_pair_rejects_empty_published() {
        let err = score_pair("Some words", "...", &MetricConfig::default(), &StopwordList::english())
            .unwrap_err();
        assert_eq!(err, MetricError::EmptyInput("published"));
    }

    #[test]
    fn stripped_user_mode_differs_from_counting_mode() {
        let sw = StopwordList::english();
        let config = MetricConfig {
            user_remove_stopwords: true,
            ..MetricConfig::default()
        };
        // Stripping "the" joins "cat" and "sat" into one run on both sides.
        let stripped = score_pair("the cat the sat", "cat sat", &config, &sw).unwrap();
        assert_eq!(stripped.user.precision, 1.0);
        let counted = score_pair("the cat the sat", "cat sat", &MetricConfig::default(), &sw).unwrap();
        assert_eq!(counted.user.precision, 0.5);
    }
}
