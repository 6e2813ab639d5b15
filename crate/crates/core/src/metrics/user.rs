use super::{same, EditMetricReport, MatchSpan, MetricError};
use crate::text::StopwordList;

/// Longest common contiguous run of `x` and `y`.
///
/// Ties go to the smallest `start_x`, then the smallest `start_y`. Returns
/// `None` when the sequences share no token. The returned span is always
/// marked `counted = false`; counting is decided by [`user_matches`].
pub fn longest_common_substring<S: AsRef<str>>(x: &[S], y: &[S]) -> Option<MatchSpan> {
    let m = y.len();
    let mut prev = vec![0usize; m + 1];
    let mut curr = vec![0usize; m + 1];
    let mut best: Option<MatchSpan> = None;
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            curr[j + 1] = if same(xi, yj) { prev[j] + 1 } else { 0 };
            let len = curr[j + 1];
            // Cells are visited in increasing (end_x, end_y) order, so the
            // first run of a given length has the smallest start pair.
            if len > best.map_or(0, |b| b.length) {
                best = Some(MatchSpan {
                    start_x: i + 1 - len,
                    start_y: j + 1 - len,
                    length: len,
                    counted: false,
                });
            }
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    best
}

/// Pivot recursion: take the longest common run, then recurse independently
/// on the parts strictly left and strictly right of it in both sequences.
///
/// Every pivot is returned, ordered by position. Stopwords only affect
/// `counted`, never pivot selection.
pub fn user_matches<S: AsRef<str>>(x: &[S], y: &[S], stopwords: &StopwordList) -> Vec<MatchSpan> {
    let mut spans = Vec::new();
    let mut pending = vec![(0..x.len(), 0..y.len())];
    while let Some((xr, yr)) = pending.pop() {
        if xr.is_empty() || yr.is_empty() {
            continue;
        }
        let Some(local) = longest_common_substring(&x[xr.clone()], &y[yr.clone()]) else {
            continue;
        };
        let start_x = xr.start + local.start_x;
        let start_y = yr.start + local.start_y;
        let end_x = start_x + local.length;
        let end_y = start_y + local.length;
        let counted = x[start_x..end_x]
            .iter()
            .any(|t| !stopwords.contains(t.as_ref()));
        spans.push(MatchSpan {
            start_x,
            start_y,
            length: local.length,
            counted,
        });
        pending.push((xr.start..start_x, yr.start..start_y));
        pending.push((end_x..xr.end, end_y..yr.end));
    }
    spans.sort_by_key(|s| s.start_x);
    spans
}

/// USER precision/recall/F1 of generated `x` against published `y`.
pub fn user_score<S: AsRef<str>>(
    x: &[S],
    y: &[S],
    stopwords: &StopwordList,
) -> Result<EditMetricReport, MetricError> {
    if x.is_empty() {
        return Err(MetricError::EmptyInput("generated"));
    }
    if y.is_empty() {
        return Err(MetricError::EmptyInput("published"));
    }
    let spans = user_matches(x, y, stopwords);
    let matched: usize = spans.iter().filter(|s| s.counted).map(|s| s.length).sum();
    Ok(EditMetricReport::new(
        matched as f64 / x.len() as f64,
        matched as f64 / y.len() as f64,
        matched,
        spans,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn span(start_x: usize, start_y: usize, length: usize, counted: bool) -> MatchSpan {
        MatchSpan {
            start_x,
            start_y,
            length,
            counted,
        }
    }

    #[test]
    fn lcsubstring_examples() {
        assert_eq!(
            longest_common_substring(&toks("a b c"), &toks("z b c q")),
            Some(span(1, 1, 2, false))
        );
        assert_eq!(longest_common_substring(&toks("a"), &toks("a")), Some(span(0, 0, 1, false)));
        assert_eq!(longest_common_substring(&toks("a b"), &toks("c d")), None);
        assert_eq!(longest_common_substring::<&str>(&[], &toks("c d")), None);
    }

    #[test]
    fn lcsubstring_tie_breaks_on_x_then_y() {
        // "b" at x=1 and "a" at x=0 both length 1; x=0 wins.
        assert_eq!(
            longest_common_substring(&toks("a b"), &toks("b a")),
            Some(span(0, 1, 1, false))
        );
        // Same x, two y positions.
        assert_eq!(
            longest_common_substring(&toks("a"), &toks("b a a")),
            Some(span(0, 1, 1, false))
        );
    }

    #[test]
    fn cat_and_dog() {
        let sw = StopwordList::english();
        let x = toks("the cat sat on the mat");
        let y = toks("the dog sat on a mat");
        let spans = user_matches(&x, &y, &sw);
        assert_eq!(
            spans,
            vec![span(0, 0, 1, false), span(2, 2, 2, true), span(5, 5, 1, true)]
        );
        let r = user_score(&x, &y, &sw).unwrap();
        assert_eq!(r.matched_tokens, 3);
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.5);
        assert_eq!(r.f1, 0.5);
    }

    #[test]
    fn identity_and_stopword_only() {
        let sw = StopwordList::english();
        let r = user_score(&toks("alpha beta"), &toks("alpha beta"), &sw).unwrap();
        assert_eq!(r.spans, vec![span(0, 0, 2, true)]);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));

        let r = user_score(&toks("the"), &toks("the"), &sw).unwrap();
        assert_eq!(r.spans, vec![span(0, 0, 1, false)]);
        assert_eq!(r.matched_tokens, 0);
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn scattered_pivots() {
        let sw = StopwordList::empty();
        let x = toks("A B C D E F G");
        let y = toks("A H B K C I D");
        let r = user_score(&x, &y, &sw).unwrap();
        assert_eq!(r.matched_tokens, 4);
        assert_eq!(r.spans.len(), 4);
        assert_eq!(r.precision, 4.0 / 7.0);
    }

    #[test]
    fn empty_inputs_are_errors() {
        let sw = StopwordList::english();
        assert_eq!(
            user_score(&toks(""), &toks("a"), &sw).unwrap_err(),
            MetricError::EmptyInput("generated")
        );
        assert_eq!(
            user_score(&toks("a"), &toks(""), &sw).unwrap_err(),
            MetricError::EmptyInput("published")
        );
    }

    /// True when every level of the recursion has a unique longest run, so
    /// the tie-break never decides a pivot.
    fn tie_free(x: &[String], y: &[String]) -> bool {
        let mut pending = vec![(0..x.len(), 0..y.len())];
        while let Some((xr, yr)) = pending.pop() {
            let (xs, ys) = (&x[xr.clone()], &y[yr.clone()]);
            let Some(best) = longest_common_substring(xs, ys) else {
                continue;
            };
            let runs = (0..xs.len())
                .flat_map(|i| (0..ys.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| {
                    i + best.length <= xs.len()
                        && j + best.length <= ys.len()
                        && xs[i..i + best.length] == ys[j..j + best.length]
                })
                .count();
            if runs > 1 {
                return false;
            }
            let (sx, sy) = (xr.start + best.start_x, yr.start + best.start_y);
            pending.push((xr.start..sx, yr.start..sy));
            pending.push((sx + best.length..xr.end, sy + best.length..yr.end));
        }
        true
    }

    #[test]
    fn tie_break_makes_swap_asymmetric() {
        let sw = StopwordList::empty();
        let x = toks("b a a");
        let y = toks("a c c a b");
        let fwd = user_score(&x, &y, &sw).unwrap();
        let bwd = user_score(&y, &x, &sw).unwrap();
        assert_eq!(fwd.matched_tokens, 1);
        assert_eq!(bwd.matched_tokens, 2);
    }

    fn seq() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(prop_oneof!["a", "b", "c", "the"], 1..14)
    }

    proptest! {
        #[test]
        fn spans_are_ordered_and_disjoint(x in seq(), y in seq()) {
            let spans = user_matches(&x, &y, &StopwordList::english());
            for w in spans.windows(2) {
                prop_assert!(w[0].start_x + w[0].length <= w[1].start_x);
                prop_assert!(w[0].start_y + w[0].length <= w[1].start_y);
            }
            for s in &spans {
                prop_assert!(s.length >= 1);
                prop_assert_eq!(&x[s.start_x..s.start_x + s.length], &y[s.start_y..s.start_y + s.length]);
            }
        }

        #[test]
        fn precision_and_recall_swap_without_ties(x in seq(), y in seq()) {
            prop_assume!(tie_free(&x, &y));
            let sw = StopwordList::english();
            let fwd = user_score(&x, &y, &sw).unwrap();
            let bwd = user_score(&y, &x, &sw).unwrap();
            prop_assert_eq!(fwd.precision, bwd.recall);
            prop_assert_eq!(fwd.recall, bwd.precision);
        }
    }
}
