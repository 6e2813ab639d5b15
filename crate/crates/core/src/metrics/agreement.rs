use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n: usize,
}

/// Sample Pearson correlation.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<Correlation, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::DegenerateInput(format!(
            "series lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(MetricError::DegenerateInput("need at least two observations".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Err(MetricError::DegenerateInput("constant series".into()));
    }
    let r = (cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation { r, n })
}

/// Items × categories count table; each cell is the number of raters who put
/// that item in that category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingsMatrix {
    rows: Vec<Vec<u64>>,
    raters: u64,
}

impl RatingsMatrix {
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self, MetricError> {
        if rows.len() < 2 {
            return Err(MetricError::DegenerateInput("need at least two rated items".into()));
        }
        let width = rows[0].len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(MetricError::DegenerateInput("rows must share a nonzero category count".into()));
        }
        let raters: u64 = rows[0].iter().sum();
        for (row, r) in rows.iter().enumerate() {
            let found: u64 = r.iter().sum();
            if found != raters {
                return Err(MetricError::InconsistentRaterCount {
                    row,
                    expected: raters,
                    found,
                });
            }
        }
        if raters < 2 {
            return Err(MetricError::DegenerateInput("need at least two raters per item".into()));
        }
        Ok(Self { rows, raters })
    }

    /// Builds the table from per-item rater labels (`0..categories`).
    pub fn from_labels(items: &[Vec<usize>], categories: usize) -> Result<Self, MetricError> {
        let rows = items
            .iter()
            .map(|labels| {
                let mut row = vec![0u64; categories];
                for &l in labels {
                    *row.get_mut(l).ok_or_else(|| {
                        MetricError::DegenerateInput(format!("label {l} outside {categories} categories"))
                    })? += 1;
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn raters(&self) -> u64 {
        self.raters
    }
}

/// Fleiss' kappa, `(P̄ − P̄e) / (1 − P̄e)`.
///
/// When every rating of every item falls in one category, chance agreement
/// is 1 and the ratio is undefined; observed agreement is then also perfect
/// and 1.0 is returned by convention.
pub fn fleiss_kappa(m: &RatingsMatrix) -> f64 {
    let n = m.raters as f64;
    let items = m.rows.len() as f64;
    let categories = m.rows[0].len();

    let mut p_bar = 0.0;
    for row in &m.rows {
        let agree: f64 = row.iter().map(|&c| (c * c) as f64).sum::<f64>() - n;
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= items;

    let total = n * items;
    let p_e: f64 = (0..categories)
        .map(|j| {
            let p = m.rows.iter().map(|r| r[j] as f64).sum::<f64>() / total;
            p * p
        })
        .sum();

    if (1.0 - p_e).abs() < 1e-15 {
        return 1.0;
    }
    (p_bar - p_e) / (1.0 - p_e)
}
