use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetError, Story};
use crate::text::stats_token_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub assignments: BTreeMap<String, Split>,
    /// Stories per split, in train/valid/test order.
    pub story_counts: [u64; 3],
    pub token_counts: [u64; 3],
    pub story_ratios: [f64; 3],
    pub token_ratios: [f64; 3],
}

impl SplitAssignment {
    pub fn stories_in(&self, split: Split) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |(_, &s)| s == split)
            .map(|(id, _)| id.as_str())
    }
}

/// Token count used for balancing: STATS tokens over all entry texts.
pub fn story_token_count(story: &Story) -> u64 {
    story
        .entries()
        .map(|(_, e)| stats_token_count(&e.text) as u64)
        .sum()
}

/// Story quotas by largest remainder, with at least one story per split.
fn quotas(n: u64, ratios: [u32; 3]) -> [u64; 3] {
    let sum: u64 = ratios.iter().map(|&r| u64::from(r)).sum();
    let mut q = [0u64; 3];
    let mut rem = [0u64; 3];
    for i in 0..3 {
        q[i] = n * u64::from(ratios[i]) / sum;
        rem[i] = n * u64::from(ratios[i]) % sum;
    }
    let mut left = n - q.iter().sum::<u64>();
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| std::cmp::Reverse(rem[i]));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        q[i] += 1;
        left -= 1;
    }
    for i in 0..3 {
        if q[i] == 0 {
            let donor = (0..3).max_by_key(|&j| (q[j], std::cmp::Reverse(j))).expect("three splits");
            q[donor] -= 1;
            q[i] = 1;
        }
    }
    q
}

/// Token-balanced train/valid/test split.
///
/// Story counts per split are fixed first (largest remainder, one story
/// minimum). Stories are then visited largest first and each goes to the
/// split, among those with quota left, with the largest remaining token need
/// per remaining story slot. The seed only shuffles stories of equal size,
/// and ties between splits go to the earlier split. Finally, pairs of
/// stories are swapped between splits while that lowers the squared
/// token-ratio error; story counts stay fixed.
pub fn split_corpus(corpus: &[Story], ratios: [u32; 3], seed: u64) -> Result<SplitAssignment, DatasetError> {
    if ratios.contains(&0) {
        return Err(DatasetError::InvalidRatios("every ratio must be positive".into()));
    }
    if corpus.len() < 3 {
        return Err(DatasetError::TooFewStories(corpus.len()));
    }
    let mut ids = std::collections::HashSet::new();
    for s in corpus {
        if !ids.insert(s.id.as_str()) {
            return Err(DatasetError::SchemaViolation {
                path: "id".into(),
                message: format!("duplicate story id `{}`", s.id),
            });
        }
    }

    let n = corpus.len() as u64;
    let quota = quotas(n, ratios);
    let sum: u32 = ratios.iter().sum();
    let target: Vec<f64> = ratios.iter().map(|&r| f64::from(r) / f64::from(sum)).collect();
    let tokens: Vec<u64> = corpus.iter().map(story_token_count).collect();
    let total_tokens: u64 = tokens.iter().sum();

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by_key(|&i| std::cmp::Reverse(tokens[i]));

    let mut counts = [0u64; 3];
    let mut token_counts = [0u64; 3];
    let mut members: [Vec<usize>; 3] = Default::default();
    for i in order {
        // Remaining token need per remaining story slot.
        let deficit = |s: usize| {
            let need = target[s] * total_tokens as f64 - token_counts[s] as f64;
            need / (quota[s] - counts[s]) as f64
        };
        let mut best: Option<usize> = None;
        for s in (0..3).filter(|&s| counts[s] < quota[s]) {
            if best.is_none_or(|b| deficit(s) > deficit(b)) {
                best = Some(s);
            }
        }
        let s = best.expect("quotas sum to the corpus size");
        counts[s] += 1;
        token_counts[s] += tokens[i];
        members[s].push(i);
    }
    refine_by_swaps(&mut members, &mut token_counts, &tokens, &target, total_tokens);
    let mut assignments = BTreeMap::new();
    for (s, list) in members.iter().enumerate() {
        for &i in list {
            assignments.insert(corpus[i].id.clone(), Split::ALL[s]);
        }
    }

    let frac = |x: u64, of: u64| if of == 0 { 0.0 } else { x as f64 / of as f64 };
    Ok(SplitAssignment {
        assignments,
        story_counts: counts,
        token_counts,
        story_ratios: counts.map(|c| frac(c, n)),
        token_ratios: token_counts.map(|t| frac(t, total_tokens)),
    })
}

/// Best-improvement swap search. For each split pair the ideal swap moves
/// half the token imbalance, so only the stories nearest that size in the
/// receiving split need checking.
fn refine_by_swaps(
    members: &mut [Vec<usize>; 3],
    token_counts: &mut [u64; 3],
    tokens: &[u64],
    target: &[f64],
    total_tokens: u64,
) {
    if total_tokens == 0 {
        return;
    }
    let t = total_tokens as f64;
    let error = |c: &[u64; 3]| -> f64 { (0..3).map(|s| (c[s] as f64 / t - target[s]).powi(2)).sum() };
    let max_rounds = tokens.len() * 4;
    for _ in 0..max_rounds {
        let current = error(token_counts);
        // (gain, a, position in a, b, position in b)
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..3 {
            for b in a + 1..3 {
                let mut sorted_b: Vec<(u64, usize)> =
                    members[b].iter().enumerate().map(|(pos, &i)| (tokens[i], pos)).collect();
                sorted_b.sort_unstable();
                let excess_a = token_counts[a] as f64 - target[a] * t;
                let excess_b = token_counts[b] as f64 - target[b] * t;
                let ideal = (excess_a - excess_b) / 2.0;
                for (pa, &i) in members[a].iter().enumerate() {
                    let want = tokens[i] as f64 - ideal;
                    let at = sorted_b.partition_point(|&(tj, _)| (tj as f64) < want);
                    for &(tj, pb) in sorted_b[at.saturating_sub(1)..(at + 1).min(sorted_b.len())].iter() {
                        let mut c = *token_counts;
                        c[a] = c[a] - tokens[i] + tj;
                        c[b] = c[b] - tj + tokens[i];
                        let gain = current - error(&c);
                        if gain > 1e-15 && best.is_none_or(|(g, ..)| gain > g) {
                            best = Some((gain, a, pa, b, pb));
                        }
                    }
                }
            }
        }
        let Some((_, a, pa, b, pb)) = best else {
            return;
        };
        let (i, j) = (members[a][pa], members[b][pb]);
        token_counts[a] = token_counts[a] - tokens[i] + tokens[j];
        token_counts[b] = token_counts[b] - tokens[j] + tokens[i];
        members[a][pa] = j;
        members[b][pb] = i;
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn sized(id: &str, tokens: usize) -> Story {
        story(id, vec![vec![entry(&format!("{id}e"), None, &"w ".repeat(tokens), 0)]])
    }

    #[test]
    fn ten_equal_stories() {
        let corpus: Vec<Story> = (0..10).map(|i| sized(&format!("s{i}"), 20)).collect();
        let a = split_corpus(&corpus, [8, 1, 1], 7).unwrap();
        assert_eq!(a.story_counts, [8, 1, 1]);
        assert_eq!(a.token_counts, [160, 20, 20]);
    }

    #[test]
    fn three_stories_one_each() {
        let corpus = vec![sized("big", 30), sized("mid", 20), sized("small", 10)];
        let a = split_corpus(&corpus, [8, 1, 1], 0).unwrap();
        // Per-slot token need is 48/6/6, so the largest goes to train. Valid
        // and test then tie at 6 and valid wins; test takes the rest.
        assert_eq!(a.assignments["big"], Split::Train);
        assert_eq!(a.assignments["mid"], Split::Valid);
        assert_eq!(a.assignments["small"], Split::Test);
    }

    #[test]
    fn swaps_fix_a_lopsided_start() {
        // Targets 110/55/55; train is 50 over and valid 45 under.
        let tokens = [100, 10, 50, 60];
        let mut members: [Vec<usize>; 3] = [vec![0, 3], vec![1], vec![2]];
        let mut counts = [160, 10, 50];
        refine_by_swaps(&mut members, &mut counts, &tokens, &[0.5, 0.25, 0.25], 220);
        assert_eq!(members, [vec![0, 1], vec![3], vec![2]]);
        assert_eq!(counts, [110, 60, 50]);

        // No single swap helps here, so nothing moves.
        let tokens = [1000, 10, 10, 500, 400];
        let mut members: [Vec<usize>; 3] = [vec![0, 1, 2], vec![3], vec![4]];
        let mut counts = [1020, 500, 400];
        refine_by_swaps(&mut members, &mut counts, &tokens, &[0.6, 0.2, 0.2], 1920);
        assert_eq!(counts, [1020, 500, 400]);
    }

    #[test]
    fn quotas_follow_largest_remainder() {
        assert_eq!(quotas(10, [8, 1, 1]), [8, 1, 1]);
        assert_eq!(quotas(100, [8, 1, 1]), [80, 10, 10]);
        assert_eq!(quotas(3, [8, 1, 1]), [1, 1, 1]);
        assert_eq!(quotas(7, [8, 1, 1]), [5, 1, 1]);
        assert_eq!(quotas(12, [1, 1, 1]), [4, 4, 4]);
    }

    #[test]
    fn errors() {
        let corpus = vec![sized("a", 1), sized("b", 1)];
        assert_eq!(split_corpus(&corpus, [8, 1, 1], 0).unwrap_err(), DatasetError::TooFewStories(2));
        let corpus = vec![sized("a", 1), sized("b", 1), sized("c", 1)];
        assert!(matches!(split_corpus(&corpus, [8, 0, 1], 0), Err(DatasetError::InvalidRatios(_))));
        let corpus = vec![sized("a", 1), sized("a", 1), sized("c", 1)];
        assert!(split_corpus(&corpus, [8, 1, 1], 0).is_err());
    }

    #[test]
    fn deterministic_partition() {
        let corpus: Vec<Story> = (0..23).map(|i| sized(&format!("s{i:02}"), (i * 7) % 5 + 1)).collect();
        let a = split_corpus(&corpus, [8, 1, 1], 42).unwrap();
        let b = split_corpus(&corpus, [8, 1, 1], 42).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.assignments.len(), corpus.len());
        assert_eq!(a.story_counts.iter().sum::<u64>(), 23);
    }
}
