use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    encode_text, normalized, softmax, DictionaryMatrix, EmbeddingLexicon, TopicError, TopicModelConfig,
};
use crate::text::TokenSequence;

fn unit_rows(r: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>), TopicError> {
    let norms = r.map_axis(Axis(1), |row| row.dot(&row).sqrt());
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
        return Err(TopicError::ZeroVector);
    }
    let unit = r / &norms.view().insert_axis(Axis(1));
    Ok((unit, norms))
}

/// Hinge loss over `negatives` plus the orthogonality penalty.
pub fn loss(
    x: ArrayView1<'_, f64>,
    negatives: &[Array1<f64>],
    r: &Array2<f64>,
    config: &TopicModelConfig,
) -> Result<f64, TopicError> {
    loss_and_gradient(x, negatives, r, config).map(|(l, _)| l)
}

/// The loss and its gradient with respect to `R`.
pub fn loss_and_gradient(
    x: ArrayView1<'_, f64>,
    negatives: &[Array1<f64>],
    r: &Array2<f64>,
    config: &TopicModelConfig,
) -> Result<(f64, Array2<f64>), TopicError> {
    if negatives.is_empty() {
        return Err(TopicError::InvalidConfig("at least one negative is required".into()));
    }
    let d = r.ncols();
    for v in std::iter::once(x).chain(negatives.iter().map(|n| n.view())) {
        if v.len() != d {
            return Err(TopicError::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
    }
    let xh = normalized(x)?;
    let w = softmax(&r.dot(&xh));
    let rec = r.t().dot(&w);
    let rx = rec.dot(&xh);

    let mut total = 0.0;
    let mut u = Array1::<f64>::zeros(d);
    for n in negatives {
        let nh = normalized(n.view())?;
        let h = config.margin - rx + rec.dot(&nh);
        if h > 0.0 {
            total += h;
            u += &nh;
            u -= &xh;
        }
    }

    // Hinge part: L depends on R through r = Rᵀw and w = softmax(R x̂).
    let mut grad = Array2::<f64>::zeros(r.raw_dim());
    if u.iter().any(|&v| v != 0.0) {
        let g = r.dot(&u);
        let mean_g = w.dot(&g);
        for (k, mut row) in grad.rows_mut().into_iter().enumerate() {
            let dz = w[k] * (g[k] - mean_g);
            row.scaled_add(w[k], &u);
            row.scaled_add(dz, &xh);
        }
    }

    // Penalty λ‖R̃R̃ᵀ − I‖², through the row normalization R̃ = R / |R|.
    if config.ortho_weight > 0.0 {
        let (unit, norms) = unit_rows(r)?;
        let mut gram = unit.dot(&unit.t());
        for i in 0..gram.nrows() {
            gram[[i, i]] -= 1.0;
        }
        total += config.ortho_weight * gram.iter().map(|v| v * v).sum::<f64>();
        let gt = gram.dot(&unit) * (4.0 * config.ortho_weight);
        for k in 0..r.nrows() {
            let gk = gt.row(k);
            let uk = unit.row(k);
            let radial = gk.dot(&uk);
            let mut row = grad.row_mut(k);
            row.scaled_add(1.0 / norms[k], &gk);
            row.scaled_add(-radial / norms[k], &uk);
        }
    }
    Ok((total, grad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: DictionaryMatrix,
    /// Mean loss over the corpus after each epoch, on a fixed set of
    /// negatives drawn once from the seed.
    pub epoch_losses: Vec<f64>,
    /// Indices of documents with no in-lexicon token.
    pub skipped: Vec<usize>,
}

/// Rows drawn from a standard normal and scaled to unit length.
pub(crate) fn initial_dictionary(k: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut r = Array2::from_shape_simple_fn((k, d), || rng.sample::<f64, _>(StandardNormal));
    for mut row in r.rows_mut() {
        let n = row.dot(&row).sqrt();
        if n > 0.0 {
            row /= n;
        } else {
            row[0] = 1.0;
        }
    }
    r
}

fn draw_negatives(n_docs: usize, exclude: usize, q: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..q)
        .map(|_| {
            let j = rng.random_range(0..n_docs - 1);
            if j >= exclude {
                j + 1
            } else {
                j
            }
        })
        .collect()
}

/// Plain SGD, one update per document per epoch, in a seeded shuffled order.
///
/// Each update draws `negatives` other documents uniformly at random.
pub fn train(
    documents: &[TokenSequence],
    lexicon: &EmbeddingLexicon,
    config: &TopicModelConfig,
) -> Result<TrainOutcome, TopicError> {
    config.validate()?;
    let mut xs = Vec::new();
    let mut skipped = Vec::new();
    for (i, doc) in documents.iter().enumerate() {
        match encode_text(doc, lexicon) {
            Ok(x) if x.iter().any(|&v| v != 0.0) => xs.push(x),
            Ok(_) | Err(TopicError::NoKnownTokens) => skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    let needed = config.topics.max(2);
    if xs.len() < needed {
        return Err(TopicError::TooFewDocuments {
            needed,
            found: xs.len(),
        });
    }
    let xs: Vec<Array1<f64>> = xs.iter().map(|x| normalized(x.view())).collect::<Result<_, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut r = initial_dictionary(config.topics, lexicon.dim(), &mut rng);
    let mut eval_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let eval_negatives: Vec<Vec<Array1<f64>>> = (0..xs.len())
        .map(|i| {
            draw_negatives(xs.len(), i, config.negatives, &mut eval_rng)
                .into_iter()
                .map(|j| xs[j].clone())
                .collect()
        })
        .collect();

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let negs: Vec<Array1<f64>> = draw_negatives(xs.len(), i, config.negatives, &mut rng)
                .into_iter()
                .map(|j| xs[j].clone())
                .collect();
            let (_, grad) = loss_and_gradient(xs[i].view(), &negs, &r, config)?;
            r.scaled_add(-config.learning_rate, &grad);
        }
        let mut sum = 0.0;
        for (x, negs) in xs.iter().zip(&eval_negatives) {
            sum += loss(x.view(), negs, &r, config)?;
        }
        epoch_losses.push(sum / xs.len() as f64);
    }

    Ok(TrainOutcome {
        model: DictionaryMatrix::new(r)?,
        epoch_losses,
        skipped,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::super::{argmax, topic_weights};
    use super::*;
    use crate::text::TokenizerMode;
    use ndarray::array;

    fn cfg(lambda: f64) -> TopicModelConfig {
        TopicModelConfig {
            ortho_weight: lambda,
            ..TopicModelConfig::default()
        }
    }

    #[test]
    fn zero_when_margin_met_and_rows_orthonormal() {
        // R = 10·I: x̂ = e0 puts nearly all weight on row 0, r ≈ 10 e0.
        let r = array![[10.0, 0.0], [0.0, 10.0]];
        let x = array![1.0, 0.0];
        let negs = vec![array![0.0, 1.0], array![0.0, 3.0]];
        assert_eq!(loss(x.view(), &negs, &r, &cfg(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn identical_negatives_give_q_margins() {
        let r = array![[1.0, 0.0], [0.0, 1.0]];
        let x = array![0.3, 0.4];
        let negs = vec![x.clone(); 5];
        let l = loss(x.view(), &negs, &r, &cfg(0.0)).unwrap();
        assert!((l - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hand_case() {
        // K=2, d=2, R = [[1,0],[1,1]], x = (1,0), one negative n = (0,1).
        // logits (1, 1) -> w = (1/2, 1/2), r = (1, 1/2).
        // hinge = 1 - r·x + r·n = 1 - 1 + 1/2 = 1/2.
        // R̃ = [[1,0],[s,s]] with s = 1/√2; R̃R̃ᵀ - I = [[0,s],[s,0]], ‖·‖² = 1.
        let r = array![[1.0, 0.0], [1.0, 1.0]];
        let l = loss(array![1.0, 0.0].view(), &[array![0.0, 1.0]], &r, &cfg(0.1)).unwrap();
        assert!((l - (0.5 + 0.1)).abs() < 1e-12, "{l}");
    }

    #[test]
    fn zero_vectors_rejected() {
        let r = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(
            loss(array![0.0, 0.0].view(), &[array![1.0, 0.0]], &r, &cfg(0.0)).unwrap_err(),
            TopicError::ZeroVector
        );
        let r0 = array![[0.0, 0.0], [0.0, 1.0]];
        assert_eq!(
            loss(array![1.0, 0.0].view(), &[array![0.0, 1.0]], &r0, &cfg(1.0)).unwrap_err(),
            TopicError::ZeroVector
        );
    }

    pub(crate) fn numeric_gradient(
        x: &Array1<f64>,
        negs: &[Array1<f64>],
        r: &Array2<f64>,
        config: &TopicModelConfig,
        h: f64,
    ) -> Array2<f64> {
        let mut g = Array2::zeros(r.raw_dim());
        for idx in 0..r.len() {
            let (i, j) = (idx / r.ncols(), idx % r.ncols());
            let mut plus = r.clone();
            plus[[i, j]] += h;
            let mut minus = r.clone();
            minus[[i, j]] -= h;
            g[[i, j]] = (loss(x.view(), negs, &plus, config).unwrap()
                - loss(x.view(), negs, &minus, config).unwrap())
                / (2.0 * h);
        }
        g
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let config = TopicModelConfig {
            ortho_weight: 0.5,
            margin: 2.0,
            ..TopicModelConfig::default()
        };
        for _ in 0..20 {
            let r = Array2::from_shape_simple_fn((3, 4), || rng.random_range(-1.0..1.0));
            let x = Array1::from_shape_simple_fn(4, || rng.random_range(-1.0..1.0));
            let negs: Vec<_> = (0..3)
                .map(|_| Array1::from_shape_simple_fn(4, || rng.random_range(-1.0..1.0)))
                .collect();
            let (_, analytic) = loss_and_gradient(x.view(), &negs, &r, &config).unwrap();
            let numeric = numeric_gradient(&x, &negs, &r, &config, 1e-6);
            let diff = (&analytic - &numeric).mapv(f64::abs).sum();
            let scale = analytic.mapv(f64::abs).sum().max(1e-8);
            assert!(diff / scale < 1e-4, "relative error {}", diff / scale);
        }
    }

    /// Three well-separated word clusters in 6 dimensions; each document
    /// draws its words from one cluster.
    pub(crate) fn planted_corpus(seed: u64, docs_per_cluster: usize) -> (EmbeddingLexicon, Vec<TokenSequence>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 6;
        let mut pairs = Vec::new();
        for c in 0..3 {
            for w in 0..8 {
                let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-0.15..0.15)).collect();
                v[2 * c] += 1.0;
                v[2 * c + 1] += 0.5;
                pairs.push((format!("c{c}w{w}"), v));
            }
        }
        let lexicon = EmbeddingLexicon::from_pairs(pairs).unwrap();
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for c in 0..3 {
            for _ in 0..docs_per_cluster {
                let words: Vec<String> = (0..6).map(|_| format!("c{c}w{}", rng.random_range(0..8))).collect();
                docs.push(TokenSequence::from_tokens(words, TokenizerMode::Metric));
                labels.push(c);
            }
        }
        (lexicon, docs, labels)
    }

    #[test]
    fn epochs_zero_returns_initialization() {
        let (lex, docs, _) = planted_corpus(1, 4);
        let config = TopicModelConfig {
            topics: 3,
            epochs: 0,
            seed: 9,
            ..TopicModelConfig::default()
        };
        let out = train(&docs, &lex, &config).unwrap();
        let init = initial_dictionary(3, lex.dim(), &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(out.model.matrix(), &init);
        assert!(out.epoch_losses.is_empty());
    }

    #[test]
    fn too_few_documents() {
        let (lex, docs, _) = planted_corpus(1, 1);
        let config = TopicModelConfig::default();
        assert_eq!(
            train(&docs, &lex, &config).unwrap_err(),
            TopicError::TooFewDocuments { needed: 50, found: 3 }
        );
    }

    #[test]
    fn planted_clusters_recovered() {
        let (lex, docs, labels) = planted_corpus(11, 40);
        let config = TopicModelConfig {
            topics: 3,
            ..TopicModelConfig::default()
        };
        let out = train(&docs, &lex, &config).unwrap();
        let r = out.model.matrix();
        let mut agree = 0;
        for c in 0..3 {
            let tops: Vec<usize> = docs
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(d, _)| argmax(&topic_weights(encode_text(d, &lex).unwrap().view(), r).unwrap()))
                .collect();
            let mode = (0..3).max_by_key(|t| tops.iter().filter(|x| *x == t).count()).unwrap();
            agree += tops.iter().filter(|&&t| t == mode).count();
        }
        assert!(agree as f64 / docs.len() as f64 >= 0.9, "agreement {agree}/{}", docs.len());
        let l = &out.epoch_losses;
        for w in l[..5].windows(2) {
            assert!(w[1] <= w[0], "losses {l:?}");
        }
    }
}
