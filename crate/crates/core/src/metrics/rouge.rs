use super::{same, EditMetricReport, MetricError};
use crate::text::StopwordList;

/// Conventional ROUGE-W weighting exponent.
pub const DEFAULT_ROUGE_W_ALPHA: f64 = 1.2;

fn filtered<'a, S: AsRef<str>>(seq: &'a [S], filter: Option<&StopwordList>) -> Vec<&'a str> {
    seq.iter()
        .map(AsRef::as_ref)
        .filter(|t| filter.is_none_or(|sw| !sw.contains(t)))
        .collect()
}

fn check_nonempty<S: AsRef<str>, T: AsRef<str>>(x: &[S], y: &[T]) -> Result<(), MetricError> {
    if x.is_empty() {
        return Err(MetricError::EmptyInput("generated"));
    }
    if y.is_empty() {
        return Err(MetricError::EmptyInput("published"));
    }
    Ok(())
}

/// Length of the longest common subsequence.
pub fn lcs_length<S: AsRef<str>>(x: &[S], y: &[S]) -> usize {
    let mut prev = vec![0usize; y.len() + 1];
    let mut curr = vec![0usize; y.len() + 1];
    for xi in x {
        for (j, yj) in y.iter().enumerate() {
            curr[j + 1] = if same(xi, yj) {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[y.len()]
}

/// ROUGE-L of generated `x` against reference `y`.
///
/// With `filter` set, stopwords are removed from both sides first.
pub fn rouge_l<S: AsRef<str>>(
    x: &[S],
    y: &[S],
    filter: Option<&StopwordList>,
) -> Result<EditMetricReport, MetricError> {
    check_nonempty(x, y)?;
    let x = filtered(x, filter);
    let y = filtered(y, filter);
    if x.is_empty() || y.is_empty() {
        // Nothing left after stopword removal.
        return Ok(EditMetricReport::new(0.0, 0.0, 0, Vec::new()));
    }
    let lcs = lcs_length(&x, &y);
    Ok(EditMetricReport::new(
        lcs as f64 / x.len() as f64,
        lcs as f64 / y.len() as f64,
        lcs,
        Vec::new(),
    ))
}

/// ROUGE-W: weighted LCS with run weight `k^alpha`, normalized through the
/// inverse weight function.
pub fn rouge_w<S: AsRef<str>>(
    x: &[S],
    y: &[S],
    alpha: f64,
    filter: Option<&StopwordList>,
) -> Result<EditMetricReport, MetricError> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(MetricError::InvalidAlpha(alpha));
    }
    check_nonempty(x, y)?;
    let x = filtered(x, filter);
    let y = filtered(y, filter);
    if x.is_empty() || y.is_empty() {
        // Nothing left after stopword removal.
        return Ok(EditMetricReport::new(0.0, 0.0, 0, Vec::new()));
    }

    let f = |k: f64| k.powf(alpha);
    let f_inv = |v: f64| v.powf(1.0 / alpha);

    let cols = y.len() + 1;
    // score, current run length, matched token count
    let mut c = vec![0.0f64; (x.len() + 1) * cols];
    let mut w = vec![0usize; (x.len() + 1) * cols];
    let mut n = vec![0usize; (x.len() + 1) * cols];
    for i in 1..=x.len() {
        for j in 1..=y.len() {
            let at = i * cols + j;
            let diag = (i - 1) * cols + (j - 1);
            let up = (i - 1) * cols + j;
            let left = i * cols + (j - 1);
            if x[i - 1] == y[j - 1] {
                let k = w[diag] as f64;
                c[at] = c[diag] + f(k + 1.0) - f(k);
                w[at] = w[diag] + 1;
                n[at] = n[diag] + 1;
            } else if c[up] >= c[left] {
                c[at] = c[up];
                n[at] = n[up];
            } else {
                c[at] = c[left];
                n[at] = n[left];
            }
        }
    }
    let last = x.len() * cols + y.len();
    let wlcs = c[last];
    Ok(EditMetricReport::new(
        f_inv(wlcs / f(x.len() as f64)),
        f_inv(wlcs / f(y.len() as f64)),
        n[last],
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn lcs_memo<'a>(
        x: &[&'a str],
        y: &[&'a str],
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if x.is_empty() || y.is_empty() {
            return 0;
        }
        let key = (x.len(), y.len());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = if x[0] == y[0] {
            1 + lcs_memo(&x[1..], &y[1..], memo)
        } else {
            lcs_memo(&x[1..], y, memo).max(lcs_memo(x, &y[1..], memo))
        };
        memo.insert(key, v);
        v
    }

    #[test]
    fn lcs_ties_on_locality_example() {
        let x = toks("A B C D E F G");
        for y in [toks("A B C D H I K"), toks("A H B K C I D")] {
            let r = rouge_l(&x, &y, None).unwrap();
            assert!((r.precision - 4.0 / 7.0).abs() < 1e-12);
            assert!((r.recall - 4.0 / 7.0).abs() < 1e-12);
            assert!((r.f1 - 4.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rouge_w_prefers_consecutive_matches() {
        let x = toks("A B C D E F G");
        let y1 = rouge_w(&x, &toks("A B C D H I K"), 2.0, None).unwrap();
        let y2 = rouge_w(&x, &toks("A H B K C I D"), 2.0, None).unwrap();
        assert!((y1.precision - 4.0 / 7.0).abs() < 1e-12);
        assert!((y2.precision - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(y1.matched_tokens, 4);
        assert_eq!(y2.matched_tokens, 4);
    }

    #[test]
    fn identity_scores_one() {
        let x = toks("one two three");
        for alpha in [1.2, 2.0, 3.5] {
            let r = rouge_w(&x, &x, alpha, None).unwrap();
            assert!((r.precision - 1.0).abs() < 1e-12);
            assert!((r.recall - 1.0).abs() < 1e-12);
        }
        assert_eq!(rouge_l(&x, &x, None).unwrap().f1, 1.0);
    }

    #[test]
    fn invalid_alpha_and_empty_inputs() {
        let x = toks("a b");
        assert_eq!(rouge_w(&x, &x, 1.0, None).unwrap_err(), MetricError::InvalidAlpha(1.0));
        assert!(matches!(rouge_w(&x, &x, f64::NAN, None), Err(MetricError::InvalidAlpha(_))));
        let sw = StopwordList::english();
        let r = rouge_l(&toks("the a"), &toks("cat"), Some(&sw)).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        let r = rouge_w(&toks("cat"), &toks("of the"), 1.2, Some(&sw)).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert_eq!(
            rouge_l(&toks(""), &toks("cat"), Some(&sw)).unwrap_err(),
            MetricError::EmptyInput("generated")
        );
        assert_eq!(
            rouge_l(&toks("cat"), &toks(""), None).unwrap_err(),
            MetricError::EmptyInput("published")
        );
    }

    #[test]
    fn stopword_removal_changes_denominators() {
        let sw = StopwordList::english();
        let x = toks("the cat and the hat");
        let y = toks("a cat in a hat");
        let r = rouge_l(&x, &y, Some(&sw)).unwrap();
        assert_eq!((r.precision, r.recall), (1.0, 1.0));
        let r = rouge_l(&x, &y, None).unwrap();
        assert_eq!(r.matched_tokens, 2);
    }

    proptest! {
        #[test]
        fn lcs_matches_memoized_recursion(
            x in proptest::collection::vec(prop_oneof!["a", "b", "c"], 0..10),
            y in proptest::collection::vec(prop_oneof!["a", "b", "c"], 0..10),
        ) {
            let xs: Vec<&str> = x.iter().map(String::as_str).collect();
            let ys: Vec<&str> = y.iter().map(String::as_str).collect();
            prop_assert_eq!(lcs_length(&xs, &ys), lcs_memo(&xs, &ys, &mut HashMap::new()));
        }

        #[test]
        fn rouge_w_never_exceeds_rouge_l(
            x in proptest::collection::vec(prop_oneof!["a", "b", "c"], 1..10),
            y in proptest::collection::vec(prop_oneof!["a", "b", "c"], 1..10),
        ) {
            let l = rouge_l(&x, &y, None).unwrap();
            let w = rouge_w(&x, &y, 2.0, None).unwrap();
            prop_assert!(w.precision <= l.precision + 1e-12);
        }
    }
}
