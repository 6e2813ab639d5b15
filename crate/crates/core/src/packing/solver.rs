//! Lexicographic constraint-hierarchy solve over integer lengths.
//!
//! The allocation is the unique optimum of this order:
//!
//! 1. all required constraints hold (boxes `0 ≤ len ≤ available`,
//!    `Σ len ≤ budget`, and user constraints marked required);
//! 2. per soft priority level, strongest first, the summed violation of that
//!    level's constraints is minimal;
//! 3. the total length is maximal;
//! 4. lengths are lexicographically maximal in declared order.
//!
//! Each level is a small mixed-integer program solved exactly. A level that
//! can be fully satisfied is promoted to hard rows; otherwise its optimum is
//! kept as a cap on its violation sum for the later stages. Stages 3 and 4
//! are folded into one objective with mixed-radix weights.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use super::lp::{q, solve_milp, Lp, Rel, Row, Q};
use super::{Allocation, Constraint, PackError, Priority, Relation, SegmentSpec};

fn to_q(r: &Rational64) -> Q {
    Q::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// A linear row over the segment lengths only.
#[derive(Clone)]
struct Linear {
    coeffs: Vec<Q>,
    relation: Relation,
    bound: Q,
}

struct Level {
    rows: Vec<Linear>,
    /// Optimal violation sum once solved; `None` when promoted to hard rows.
    cap: Option<Q>,
}

struct Model {
    names: Vec<String>,
    upper: Vec<i64>,
    hard: Vec<Linear>,
    levels: Vec<Level>,
}

impl Model {
    fn build(
        specs: &[SegmentSpec],
        constraints: &[Constraint],
        budget: u32,
    ) -> Result<Self, PackError> {
        let mut ordered: Vec<&SegmentSpec> = specs.iter().collect();
        ordered.sort_by_key(|s| s.declared_index);
        let mut seen_idx = HashSet::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, s) in ordered.iter().enumerate() {
            if !seen_idx.insert(s.declared_index) {
                return Err(PackError::InvalidSpec(format!(
                    "duplicate declared_index {}",
                    s.declared_index
                )));
            }
            if index.insert(s.name.as_str(), i).is_some() {
                return Err(PackError::InvalidSpec(format!("duplicate segment `{}`", s.name)));
            }
        }
        let n = ordered.len();

        let linear = |c: &Constraint| -> Result<Linear, PackError> {
            if c.terms.is_empty() {
                return Err(PackError::InvalidSpec("constraint without terms".into()));
            }
            let mut coeffs = vec![Q::zero(); n];
            for (name, coef) in &c.terms {
                let &i = index
                    .get(name.as_str())
                    .ok_or_else(|| PackError::UnknownSegment(name.clone()))?;
                coeffs[i] += to_q(coef);
            }
            Ok(Linear {
                coeffs,
                relation: c.relation,
                bound: to_q(&c.bound),
            })
        };

        let mut hard = vec![Linear {
            coeffs: vec![q(1); n],
            relation: Relation::Le,
            bound: q(i64::from(budget)),
        }];
        let mut by_strength: BTreeMap<u32, Vec<Linear>> = BTreeMap::new();
        for c in constraints {
            let row = linear(c)?;
            match c.priority {
                Priority::Required => hard.push(row),
                Priority::Strength(s) => by_strength.entry(s).or_default().push(row),
            }
        }
        let levels = by_strength
            .into_iter()
            .rev()
            .map(|(_, rows)| Level { rows, cap: None })
            .collect();

        Ok(Self {
            names: ordered.iter().map(|s| s.name.clone()).collect(),
            upper: ordered.iter().map(|s| i64::from(s.available)).collect(),
            hard,
            levels,
        })
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    /// Assembles the program for one stage. `soft` lists the levels whose
    /// constraints carry violation columns; the returned ranges say which
    /// columns belong to which of those levels.
    fn program(&self, soft: &[&Level]) -> (Lp, Vec<std::ops::Range<usize>>) {
        let n = self.n();
        let violation_cols: usize = soft
            .iter()
            .flat_map(|l| &l.rows)
            .map(|r| if r.relation == Relation::Eq { 2 } else { 1 })
            .sum();
        let width = n + violation_cols;
        let widen = |coeffs: &[Q]| {
            let mut v = coeffs.to_vec();
            v.resize(width, Q::zero());
            v
        };
        let rel = |r: Relation| match r {
            Relation::Le => Rel::Le,
            Relation::Ge => Rel::Ge,
            Relation::Eq => Rel::Eq,
        };

        let mut rows: Vec<Row> = self
            .hard
            .iter()
            .map(|h| Row {
                coeffs: widen(&h.coeffs),
                rel: rel(h.relation),
                rhs: h.bound.clone(),
            })
            .collect();
        let mut ranges = Vec::new();
        let mut col = n;
        for level in soft {
            let start = col;
            for r in &level.rows {
                let mut coeffs = widen(&r.coeffs);
                match r.relation {
                    // expr - v <= bound
                    Relation::Le => {
                        coeffs[col] = q(-1);
                        col += 1;
                    }
                    // expr + v >= bound
                    Relation::Ge => {
                        coeffs[col] = q(1);
                        col += 1;
                    }
                    // expr + v⁻ - v⁺ = bound
                    Relation::Eq => {
                        coeffs[col] = q(1);
                        coeffs[col + 1] = q(-1);
                        col += 2;
                    }
                }
                rows.push(Row {
                    coeffs,
                    rel: rel(r.relation),
                    rhs: r.bound.clone(),
                });
            }
            if let Some(cap) = &level.cap {
                let mut coeffs = vec![Q::zero(); width];
                for c in &mut coeffs[start..col] {
                    *c = q(1);
                }
                rows.push(Row {
                    coeffs,
                    rel: Rel::Le,
                    rhs: cap.clone(),
                });
            }
            ranges.push(start..col);
        }
        (
            Lp {
                n: width,
                rows,
                objective: vec![Q::zero(); width],
            },
            ranges,
        )
    }
}

/// Solves the allocation problem. `specs` may come in any order; ties are
/// broken by `declared_index`.
pub fn solve(
    specs: &[SegmentSpec],
    constraints: &[Constraint],
    budget: u32,
) -> Result<Allocation, PackError> {
    let mut model = Model::build(specs, constraints, budget)?;
    let n = model.n();

    for li in 0..model.levels.len() {
        let (lp, ranges) = {
            let soft: Vec<&Level> = model.levels[..=li]
                .iter()
                .filter(|l| l.cap.is_some())
                .chain(std::iter::once(&model.levels[li]))
                .collect();
            model.program(&soft)
        };
        let mut lp = lp;
        let current = ranges.last().expect("current level").clone();
        for c in current {
            lp.objective[c] = q(1);
        }
        let (_, best) = solve_milp(&lp, &model.upper).ok_or(PackError::Infeasible)?;
        let level = &mut model.levels[li];
        if best.is_zero() {
            let promoted = std::mem::take(&mut level.rows);
            model.hard.extend(promoted);
        } else {
            level.cap = Some(best);
        }
    }

    // Maximize W·Σlen + Σ w_i·len_i, where w is the mixed-radix place value
    // of len_i with digit range 0..=available_i and W exceeds Σ w_i·len_i.
    let mut place = vec![Q::zero(); n];
    let mut radix = q(1);
    for i in (0..n).rev() {
        place[i] = radix.clone();
        radix *= q(model.upper[i] + 1);
    }
    let soft: Vec<&Level> = model.levels.iter().filter(|l| l.cap.is_some()).collect();
    let (mut lp, _) = model.program(&soft);
    for i in 0..n {
        lp.objective[i] = -(&radix + &place[i]);
    }
    let (x, _) = solve_milp(&lp, &model.upper).ok_or(PackError::Infeasible)?;

    let lengths = model
        .names
        .iter()
        .zip(&x)
        .map(|(name, v)| {
            let len = v.to_integer().to_u32().expect("length within u32 bounds");
            (name.clone(), len)
        })
        .collect();
    Ok(Allocation { lengths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{SegmentId, Trim};

    pub(crate) fn spec(name: &str, available: u32, idx: u32) -> SegmentSpec {
        SegmentSpec {
            name: name.into(),
            segment_ids: vec![SegmentId(0)],
            available,
            trim: Trim::Head,
            declared_index: idx,
        }
    }

    #[test]
    fn everything_fits() {
        let a = solve(&[spec("entry", 100, 0)], &[], 1024).unwrap();
        assert_eq!(a.get("entry"), Some(100));
    }

    #[test]
    fn priorities_are_lexicographic() {
        let specs = [spec("a", 8, 0), spec("b", 8, 1)];
        let cons = [
            Constraint::single("a", Relation::Ge, 6, Priority::Strength(3)),
            Constraint::single("b", Relation::Ge, 6, Priority::Strength(1)),
        ];
        let a = solve(&specs, &cons, 10).unwrap();
        assert_eq!(a.to_string(), "a=6 b=4");
        // Swapping strengths swaps the winner.
        let cons = [
            Constraint::single("a", Relation::Ge, 6, Priority::Strength(1)),
            Constraint::single("b", Relation::Ge, 6, Priority::Strength(3)),
        ];
        assert_eq!(solve(&specs, &cons, 10).unwrap().to_string(), "a=4 b=6");
    }

    #[test]
    fn entry_minimum_when_possible() {
        let specs = [spec("intro", 600, 0), spec("entry", 900, 1), spec("bio", 300, 2)];
        let cons = [Constraint::single("entry", Relation::Ge, 250, Priority::Strength(5))];
        let a = solve(&specs, &cons, 1024).unwrap();
        assert!(a.get("entry").unwrap() >= 250);
        assert_eq!(a.total(), 1024);
        // Declared order breaks the remaining tie in favor of `intro`.
        assert_eq!(a.get("intro"), Some(600));
        assert_eq!(a.get("entry"), Some(424));
    }

    #[test]
    fn missing_segments_collapse() {
        let specs = [spec("a", 0, 0), spec("b", 5, 1)];
        let cons = [Constraint::single("a", Relation::Ge, 3, Priority::Strength(2))];
        let a = solve(&specs, &cons, 10).unwrap();
        assert_eq!(a.to_string(), "a=0 b=5");
    }

    #[test]
    fn required_infeasible_and_unknown_segment() {
        let specs = [spec("a", 4, 0)];
        let cons = [Constraint::single("a", Relation::Ge, 5, Priority::Required)];
        assert_eq!(solve(&specs, &cons, 10).unwrap_err(), PackError::Infeasible);
        let cons = [Constraint::single("zz", Relation::Ge, 1, Priority::Required)];
        assert_eq!(
            solve(&specs, &cons, 10).unwrap_err(),
            PackError::UnknownSegment("zz".into())
        );
    }

    #[test]
    fn required_without_integer_solution() {
        // 2a = 3 is feasible over the reals only.
        let specs = [spec("a", 4, 0)];
        let cons = [Constraint::new(
            vec![("a".into(), Rational64::from_integer(2))],
            Relation::Eq,
            Rational64::from_integer(3),
            Priority::Required,
        )];
        assert_eq!(solve(&specs, &cons, 10).unwrap_err(), PackError::Infeasible);
    }

    #[test]
    fn duplicate_specs_rejected() {
        let specs = [spec("a", 4, 0), spec("a", 4, 1)];
        assert!(matches!(solve(&specs, &[], 10), Err(PackError::InvalidSpec(_))));
        let specs = [spec("a", 4, 0), spec("b", 4, 0)];
        assert!(matches!(solve(&specs, &[], 10), Err(PackError::InvalidSpec(_))));
    }

    #[test]
    fn equality_soft_constraint_and_fractions() {
        let specs = [spec("a", 10, 0), spec("b", 10, 1)];
        // a = 1/2 b, softly; with budget 9 the best split is a=3, b=6.
        let cons = [Constraint::new(
            vec![
                ("a".into(), Rational64::from_integer(1)),
                ("b".into(), Rational64::new(-1, 2)),
            ],
            Relation::Eq,
            Rational64::from_integer(0),
            Priority::Strength(1),
        )];
        assert_eq!(solve(&specs, &cons, 9).unwrap().to_string(), "a=3 b=6");
    }
}
