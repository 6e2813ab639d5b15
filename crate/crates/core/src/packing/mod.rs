//! Token-budget allocation and context composition.
//!
//! Every context segment (scene intro, cards, biography, previous entries,
//! ...) gets an integer token length chosen by a constraint hierarchy:
//! required linear constraints must hold, soft constraints are satisfied in
//! priority order, and leftover freedom is spent on packing as many tokens
//! as possible. [`pack`] then cuts each segment to its length and lays the
//! tokens out with positions and segment-id sets, and [`compose_embeddings`]
//! turns that layout into input vectors by summing position, token and
//! segment embeddings.

mod compose;
mod lp;
mod policy;
mod solver;

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compose::{
    compose_embeddings, pack, BundleSegment, ComposedContext, ComposedItem, EmbeddingTables,
    PackedContext, SegmentVocabulary, TokenVocabulary,
};
pub use policy::{parse_expression, Policy, SegmentDecl};
pub use solver::solve;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("required constraints admit no integer solution")]
    Infeasible,
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("invalid segment spec: {0}")]
    InvalidSpec(String),
    #[error("segment `{segment}` declares {expected} tokens but has {found}")]
    LengthMismatch {
        segment: String,
        expected: u32,
        found: usize,
    },
    #[error("no separator token for segment `{0}`")]
    MissingSeparator(String),
    #[error("{kind} id {id} out of range (table has {limit} rows)")]
    IdOutOfRange {
        kind: &'static str,
        id: usize,
        limit: usize,
    },
    #[error("policy line {line}: {message}")]
    Policy { line: usize, message: String },
}

/// Index into the segment vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trim {
    /// Keep the first tokens.
    #[default]
    Head,
    /// Keep the last tokens.
    Tail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub name: String,
    pub segment_ids: Vec<SegmentId>,
    pub available: u32,
    pub trim: Trim,
    pub declared_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "le",
            Relation::Ge => "ge",
            Relation::Eq => "eq",
        })
    }
}

/// Constraint strength. Larger numbers are stronger; `Required` outranks
/// every soft level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    Required,
    Strength(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(String, Rational64)>,
    pub relation: Relation,
    pub bound: Rational64,
    pub priority: Priority,
}

impl Constraint {
    pub fn new(
        terms: Vec<(String, Rational64)>,
        relation: Relation,
        bound: Rational64,
        priority: Priority,
    ) -> Self {
        Self {
            terms,
            relation,
            bound,
            priority,
        }
    }

    /// `segment <relation> bound` with unit coefficient.
    pub fn single(segment: &str, relation: Relation, bound: i64, priority: Priority) -> Self {
        Self::new(
            vec![(segment.to_string(), Rational64::from_integer(1))],
            relation,
            Rational64::from_integer(bound),
            priority,
        )
    }

    /// How far `lengths` (looked up by segment name) is from satisfying the
    /// constraint; zero when satisfied.
    pub fn violation(&self, length_of: impl Fn(&str) -> i64) -> Rational64 {
        let value: Rational64 = self
            .terms
            .iter()
            .map(|(name, c)| c * Rational64::from_integer(length_of(name)))
            .sum();
        let zero = Rational64::from_integer(0);
        match self.relation {
            Relation::Le => (value - self.bound).max(zero),
            Relation::Ge => (self.bound - value).max(zero),
            Relation::Eq => {
                let d = value - self.bound;
                if d < zero {
                    -d
                } else {
                    d
                }
            }
        }
    }
}

/// Token length per segment, in declared order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub lengths: Vec<(String, u32)>,
}

impl Allocation {
    pub fn get(&self, name: &str) -> Option<u32> {
        self.lengths.iter().find(|(n, _)| n == name).map(|&(_, l)| l)
    }

    pub fn total(&self) -> u64 {
        self.lengths.iter().map(|&(_, l)| u64::from(l)).sum()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, len)) in self.lengths.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{name}={len}")?;
        }
        Ok(())
    }
}
