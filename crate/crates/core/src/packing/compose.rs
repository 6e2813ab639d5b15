use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::{solve, Allocation, Constraint, PackError, SegmentId, SegmentSpec, Trim};

/// Labels for segment ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentVocabulary {
    labels: Vec<String>,
    index: HashMap<String, SegmentId>,
}

impl SegmentVocabulary {
    /// Labels used by generation bundles, in a fixed order so ids are stable.
    pub const STANDARD: [&'static str; 15] = [
        "intro",
        "card",
        "challenge",
        "strength",
        "weakness",
        "item",
        "goal",
        "location",
        "wild",
        "character",
        "biography",
        "entry",
        "prev_entry",
        "char_entry",
        "narrator",
    ];

    pub fn standard() -> Self {
        let mut v = Self::default();
        for l in Self::STANDARD {
            v.intern(l);
        }
        v
    }

    pub fn intern(&mut self, label: &str) -> SegmentId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = SegmentId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<SegmentId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: SegmentId) -> Option<&str> {
        self.labels.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// String tokens to dense ids, with one reserved separator per segment type.
#[derive(Debug, Clone, Default)]
pub struct TokenVocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl TokenVocabulary {
    pub fn id(&mut self, token: &str) -> usize {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    /// Separator token for a segment type, e.g. `<|intro|>`.
    pub fn separator(&mut self, segment_type: &str) -> usize {
        self.id(&format!("<|{segment_type}|>"))
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A context segment with its source tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSegment<T> {
    pub spec: SegmentSpec,
    pub tokens: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedItem<T> {
    pub token: T,
    pub position: usize,
    pub segments: Vec<SegmentId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComposedContext<T> {
    pub items: Vec<ComposedItem<T>>,
}

impl<T> ComposedContext<T> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedContext<T> {
    pub allocation: Allocation,
    pub context: ComposedContext<T>,
}

/// Segment type for separator lookup: the name up to the first `.`.
fn segment_type(name: &str) -> &str {
    name.split('.').next().unwrap_or(name)
}

/// Allocates the budget and lays out the chosen tokens.
///
/// Every segment that has source tokens reserves one budget slot for its
/// separator before the solve. Segments allocated a positive length emit
/// their separator followed by their head or tail tokens; all items of a
/// segment carry its full id set.
pub fn pack<T: Clone>(
    bundle: &[BundleSegment<T>],
    constraints: &[Constraint],
    budget: u32,
    separators: &HashMap<String, T>,
) -> Result<PackedContext<T>, PackError> {
    for seg in bundle {
        if seg.tokens.len() != seg.spec.available as usize {
            return Err(PackError::LengthMismatch {
                segment: seg.spec.name.clone(),
                expected: seg.spec.available,
                found: seg.tokens.len(),
            });
        }
    }
    let specs: Vec<SegmentSpec> = bundle.iter().map(|s| s.spec.clone()).collect();
    let overhead = specs.iter().filter(|s| s.available > 0).count() as u32;
    let allocation = solve(&specs, constraints, budget.saturating_sub(overhead))?;

    let mut ordered: Vec<&BundleSegment<T>> = bundle.iter().collect();
    ordered.sort_by_key(|s| s.spec.declared_index);

    let mut items = Vec::new();
    for seg in ordered {
        let len = allocation.get(&seg.spec.name).unwrap_or(0) as usize;
        if len == 0 {
            continue;
        }
        let sep = separators
            .get(&seg.spec.name)
            .or_else(|| separators.get(segment_type(&seg.spec.name)))
            .ok_or_else(|| PackError::MissingSeparator(seg.spec.name.clone()))?;
        let body = match seg.spec.trim {
            Trim::Head => &seg.tokens[..len],
            Trim::Tail => &seg.tokens[seg.tokens.len() - len..],
        };
        for token in std::iter::once(sep).chain(body) {
            items.push(ComposedItem {
                token: token.clone(),
                position: items.len(),
                segments: seg.spec.segment_ids.clone(),
            });
        }
    }
    Ok(PackedContext {
        allocation,
        context: ComposedContext { items },
    })
}

/// Token, position and segment embedding tables of a shared width.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTables {
    pub token: Array2<f64>,
    pub position: Array2<f64>,
    pub segment: Array2<f64>,
}

impl EmbeddingTables {
    pub fn new(token: Array2<f64>, position: Array2<f64>, segment: Array2<f64>) -> Result<Self, PackError> {
        let d = token.ncols();
        if position.ncols() != d || segment.ncols() != d {
            return Err(PackError::InvalidSpec(format!(
                "embedding widths differ: token {d}, position {}, segment {}",
                position.ncols(),
                segment.ncols()
            )));
        }
        Ok(Self {
            token,
            position,
            segment,
        })
    }

    pub fn zeros(vocab: usize, max_len: usize, segments: usize, d: usize) -> Self {
        Self {
            token: Array2::zeros((vocab, d)),
            position: Array2::zeros((max_len, d)),
            segment: Array2::zeros((segments, d)),
        }
    }

    pub fn width(&self) -> usize {
        self.token.ncols()
    }
}

fn row<'a>(table: &'a Array2<f64>, id: usize, kind: &'static str) -> Result<ArrayView1<'a, f64>, PackError> {
    if id >= table.nrows() {
        return Err(PackError::IdOutOfRange {
            kind,
            id,
            limit: table.nrows(),
        });
    }
    Ok(table.row(id))
}

/// Input vectors: row `i` is `position[pos_i] + token[tok_i] + Σ segment[s]`
/// over the item's segment ids.
pub fn compose_embeddings(
    ctx: &ComposedContext<usize>,
    tables: &EmbeddingTables,
) -> Result<Array2<f64>, PackError> {
    let mut out = Array2::zeros((ctx.len(), tables.width()));
    for (i, item) in ctx.items.iter().enumerate() {
        let mut acc = row(&tables.position, item.position, "position")?.to_owned();
        acc += &row(&tables.token, item.token, "token")?;
        for s in &item.segments {
            acc += &row(&tables.segment, s.0 as usize, "segment")?;
        }
        out.row_mut(i).assign(&acc);
    }
    Ok(out)
}
