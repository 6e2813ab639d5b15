//! Exact rational linear and mixed-integer programming.
//!
//! Dense two-phase simplex with Bland's rule, plus depth-first branch and
//! bound over the integer columns. Problem sizes here are tiny (tens of
//! rows), so exactness is worth more than speed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Q = BigRational;

pub(crate) fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<Q>,
    pub rel: Rel,
    pub rhs: Q,
}

/// `minimize objective · x` subject to `rows`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub(crate) struct Lp {
    pub n: usize,
    pub rows: Vec<Row>,
    pub objective: Vec<Q>,
}

#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

struct Tableau {
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Q {
        &self.t[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &p;
                }
            }
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs for `cost` over the current basis.
    fn reduced(&self, cost: &[Q]) -> Vec<Q> {
        let mut d: Vec<Q> = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let a = &self.t[r][j];
                if !a.is_zero() {
                    *dj = &*dj - &cost[b] * a;
                }
            }
        }
        d
    }

    /// Runs simplex iterations for `cost`, never entering a column in
    /// `blocked`. Returns false when unbounded.
    fn optimize(&mut self, cost: &[Q], blocked: &[bool]) -> bool {
        loop {
            let d = self.reduced(cost);
            let Some(enter) = (0..self.cols).find(|&j| !blocked[j] && d[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Q)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

pub(crate) fn solve_lp(lp: &Lp) -> LpOutcome {
    let m = lp.rows.len();
    let n = lp.n;

    let mut rows: Vec<Row> = lp.rows.clone();
    for row in &mut rows {
        if row.rhs.is_negative() {
            for c in &mut row.coeffs {
                *c = -&*c;
            }
            row.rhs = -&row.rhs;
            row.rel = match row.rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
    }

    let slack_count = rows.iter().filter(|r| r.rel != Rel::Eq).count();
    let art_count = rows.iter().filter(|r| r.rel != Rel::Le).count();
    let cols = n + slack_count + art_count;
    let art_start = n + slack_count;

    let mut t = vec![vec![Q::zero(); cols + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut next_slack, mut next_art) = (n, art_start);
    for (r, row) in rows.iter().enumerate() {
        for (j, c) in row.coeffs.iter().enumerate() {
            t[r][j] = c.clone();
        }
        t[r][cols] = row.rhs.clone();
        match row.rel {
            Rel::Le => {
                t[r][next_slack] = Q::one();
                basis[r] = next_slack;
                next_slack += 1;
            }
            Rel::Ge => {
                t[r][next_slack] = -Q::one();
                next_slack += 1;
                t[r][next_art] = Q::one();
                basis[r] = next_art;
                next_art += 1;
            }
            Rel::Eq => {
                t[r][next_art] = Q::one();
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, cols };

    if art_count > 0 {
        let mut cost = vec![Q::zero(); cols];
        for c in cost.iter_mut().skip(art_start) {
            *c = Q::one();
        }
        tab.optimize(&cost, &vec![false; cols]);
        let infeasibility: Q = tab
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b >= art_start)
            .map(|(r, _)| tab.rhs(r).clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tab.t[r][j].is_zero()) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![Q::zero(); cols];
    cost[..n].clone_from_slice(&lp.objective);
    let blocked: Vec<bool> = (0..cols).map(|j| j >= art_start).collect();
    if !tab.optimize(&cost, &blocked) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![Q::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r).clone();
        }
    }
    let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

/// Minimizes over `lp` with the first `int_bounds.len()` columns restricted
/// to integers in `[0, bound]`. Returns `None` if infeasible.
pub(crate) fn solve_milp(lp: &Lp, int_bounds: &[i64]) -> Option<(Vec<Q>, Q)> {
    let k = int_bounds.len();
    let mut incumbent: Option<(Vec<Q>, Q)> = None;
    let mut stack: Vec<(Vec<i64>, Vec<i64>)> = vec![(vec![0; k], int_bounds.to_vec())];

    while let Some((lo, hi)) = stack.pop() {
        let mut node = lp.clone();
        for i in 0..k {
            let mut unit = vec![Q::zero(); lp.n];
            unit[i] = Q::one();
            node.rows.push(Row {
                coeffs: unit.clone(),
                rel: Rel::Le,
                rhs: q(hi[i]),
            });
            if lo[i] > 0 {
                node.rows.push(Row {
                    coeffs: unit,
                    rel: Rel::Ge,
                    rhs: q(lo[i]),
                });
            }
        }
        let LpOutcome::Optimal { x, value } = solve_lp(&node) else {
            continue;
        };
        if let Some((_, best)) = &incumbent {
            if value >= *best {
                continue;
            }
        }
        match (0..k).find(|&i| !x[i].is_integer()) {
            None => incumbent = Some((x, value)),
            Some(i) => {
                let down = x[i].floor().to_integer();
                let down: i64 = down.try_into().expect("bounded integer column");
                let mut up_lo = lo.clone();
                up_lo[i] = down + 1;
                let mut down_hi = hi.clone();
                down_hi[i] = down;
                // Explore the down branch first.
                stack.push((up_lo, hi));
                stack.push((lo, down_hi));
            }
        }
    }
    incumbent
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[i64], rel: Rel, rhs: i64) -> Row {
        Row {
            coeffs: coeffs.iter().map(|&c| q(c)).collect(),
            rel,
            rhs: q(rhs),
        }
    }

    fn optimal(out: LpOutcome) -> (Vec<Q>, Q) {
        match out {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_lp() {
        // max x + y  s.t. x + 2y <= 4, 3x + y <= 6
        let lp = Lp {
            n: 2,
            rows: vec![row(&[1, 2], Rel::Le, 4), row(&[3, 1], Rel::Le, 6)],
            objective: vec![q(-1), q(-1)],
        };
        let (x, v) = optimal(solve_lp(&lp));
        assert_eq!(x, vec![Q::new(8.into(), 5.into()), Q::new(6.into(), 5.into())]);
        assert_eq!(v, Q::new((-14).into(), 5.into()));
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x  s.t. x + y = 5, y <= 2, x >= 1
        let lp = Lp {
            n: 2,
            rows: vec![
                row(&[1, 1], Rel::Eq, 5),
                row(&[0, 1], Rel::Le, 2),
                row(&[1, 0], Rel::Ge, 1),
            ],
            objective: vec![q(1), q(0)],
        };
        let (x, _) = optimal(solve_lp(&lp));
        assert_eq!(x, vec![q(3), q(2)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = Lp {
            n: 1,
            rows: vec![row(&[1], Rel::Le, 1), row(&[1], Rel::Ge, 2)],
            objective: vec![q(0)],
        };
        assert!(matches!(solve_lp(&lp), LpOutcome::Infeasible));
        let lp = Lp {
            n: 1,
            rows: vec![row(&[1], Rel::Ge, 2)],
            objective: vec![q(-1)],
        };
        assert!(matches!(solve_lp(&lp), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let lp = Lp {
            n: 2,
            rows: vec![row(&[1, 1], Rel::Eq, 2), row(&[2, 2], Rel::Eq, 4)],
            objective: vec![q(1), q(2)],
        };
        let (x, _) = optimal(solve_lp(&lp));
        assert_eq!(x, vec![q(2), q(0)]);
    }

    #[test]
    fn milp_rounds_correctly() {
        // max x + y  s.t. 2x + 2y <= 5, integers in [0, 3] -> 2
        let lp = Lp {
            n: 2,
            rows: vec![row(&[2, 2], Rel::Le, 5)],
            objective: vec![q(-1), q(-1)],
        };
        let (_, v) = solve_milp(&lp, &[3, 3]).unwrap();
        assert_eq!(v, q(-2));
        // 2x = 3 has no integer solution.
        let lp = Lp {
            n: 1,
            rows: vec![row(&[2], Rel::Eq, 3)],
            objective: vec![q(0)],
        };
        assert!(solve_milp(&lp, &[5]).is_none());
    }
}
