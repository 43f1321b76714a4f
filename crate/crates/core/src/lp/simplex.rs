//! Dense two-phase primal simplex with Bland's rule.
//!
//! Phase 1 minimizes the sum of artificial variables from the slack/artificial
//! starting basis; phase 2 never lets an artificial re-enter. Every row keeps
//! an identity column (its slack or artificial), so the optimal dual values
//! are read straight off the reduced costs of those columns.

use std::cmp::Ordering;

use super::scalar::Scalar;
use super::{ConstraintSystem, Relation};

#[derive(Debug, Clone)]
pub(crate) enum Outcome<S> {
    Optimal { primal: Vec<S>, dual: Vec<S> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColumnKind {
    Plus(usize),
    Minus(usize),
    Slack,
    Artificial,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    /// Reduced costs `c_B B^{-1} A_j - c_j`; optimal for maximization when
    /// none is negative.
    reduced: Vec<S>,
}

impl<S: Scalar> Tableau<S> {
    fn width(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width();
        let p = self.rows[row][col].clone();
        for j in 0..width {
            if !self.rows[row][j].near_zero() {
                self.rows[row][j] = self.rows[row][j].div(&p);
            }
        }
        self.rhs[row] = self.rhs[row].div(&p);
        // Snap the pivot entry; avoids drift in floating mode.
        self.rows[row][col] = S::from_rational(&crate::rational::int(1));

        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        let nonzero: Vec<usize> = (0..width).filter(|&j| !pivot_row[j].near_zero()).collect();
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let f = self.rows[r][col].clone();
            if f.near_zero() {
                continue;
            }
            for &j in &nonzero {
                self.rows[r][j] = self.rows[r][j].sub(&f.mul(&pivot_row[j]));
            }
            self.rows[r][col] = S::nil();
            self.rhs[r] = self.rhs[r].sub(&f.mul(&pivot_rhs));
        }
        let f = self.reduced[col].clone();
        if !f.near_zero() {
            for &j in &nonzero {
                self.reduced[j] = self.reduced[j].sub(&f.mul(&pivot_row[j]));
            }
            self.reduced[col] = S::nil();
        }
        self.basis[row] = col;
    }

    fn price(&mut self, cost: &[S]) {
        let width = self.width();
        let mut reduced: Vec<S> = cost.iter().map(|c| c.neg()).collect();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.near_zero() {
                continue;
            }
            for (out, a) in reduced.iter_mut().zip(&self.rows[r]).take(width) {
                if !a.near_zero() {
                    *out = out.add(&cb.mul(a));
                }
            }
        }
        self.reduced = reduced;
    }

    /// Runs Bland-rule iterations. Returns `false` when unbounded.
    fn optimize(&mut self, allowed: impl Fn(ColumnKind) -> bool) -> bool {
        loop {
            let entering = (0..self.width())
                .find(|&j| allowed(self.kinds[j]) && self.reduced[j].below_zero());
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, S)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.above_zero() {
                    continue;
                }
                let ratio = self.rhs[r].div(a);
                let better = match &leave {
                    None => true,
                    Some((best_r, best)) => match ratio.compare(best) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*best_r],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Solves `max objective·x` over `system` in arithmetic `S`.
pub(crate) fn solve<S: Scalar>(system: &ConstraintSystem, objective: &[S]) -> Outcome<S> {
    let n = system.variables.len();
    let mut kinds = Vec::new();
    let mut column_of = Vec::with_capacity(n);
    for v in 0..n {
        let plus = kinds.len();
        kinds.push(ColumnKind::Plus(v));
        let minus = if system.nonneg[v] {
            None
        } else {
            kinds.push(ColumnKind::Minus(v));
            Some(plus + 1)
        };
        column_of.push((plus, minus));
    }
    let structural = kinds.len();

    let m = system.rows.len();
    let mut flips = Vec::with_capacity(m);
    let mut relations = Vec::with_capacity(m);
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for row in &system.rows {
        let mut dense = vec![S::nil(); structural];
        for (v, c) in &row.coeffs {
            let c = S::from_rational(c);
            let (plus, minus) = column_of[*v];
            dense[plus] = dense[plus].add(&c);
            if let Some(minus) = minus {
                dense[minus] = dense[minus].sub(&c);
            }
        }
        let mut b = S::from_rational(&row.rhs);
        let mut rel = row.relation;
        let flip = b.below_zero();
        if flip {
            dense.iter_mut().for_each(|x| *x = x.neg());
            b = b.neg();
            rel = rel.flipped();
        }
        flips.push(flip);
        relations.push(rel);
        rows.push(dense);
        rhs.push(b);
    }

    // Slack / surplus / artificial columns.
    let mut identity = vec![0usize; m];
    let mut extra: Vec<(usize, ColumnKind, S)> = Vec::new();
    let one = S::from_rational(&crate::rational::int(1));
    for (r, rel) in relations.iter().enumerate() {
        match rel {
            Relation::Le => {
                identity[r] = structural + extra.len();
                extra.push((r, ColumnKind::Slack, one.clone()));
            }
            Relation::Ge => {
                extra.push((r, ColumnKind::Slack, one.neg()));
                identity[r] = structural + extra.len();
                extra.push((r, ColumnKind::Artificial, one.clone()));
            }
            Relation::Eq => {
                identity[r] = structural + extra.len();
                extra.push((r, ColumnKind::Artificial, one.clone()));
            }
        }
    }
    for (_, kind, _) in &extra {
        kinds.push(*kind);
    }
    let width = kinds.len();
    for row in rows.iter_mut() {
        row.resize(width, S::nil());
    }
    for (offset, (r, _, value)) in extra.iter().enumerate() {
        rows[*r][structural + offset] = value.clone();
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis: identity.clone(),
        kinds,
        reduced: Vec::new(),
    };

    // Phase 1.
    let has_artificial = t.kinds.contains(&ColumnKind::Artificial);
    if has_artificial {
        let cost: Vec<S> = t
            .kinds
            .iter()
            .map(|k| if *k == ColumnKind::Artificial { one.neg() } else { S::nil() })
            .collect();
        t.price(&cost);
        t.optimize(|_| true);
        let infeasibility = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| t.kinds[b] == ColumnKind::Artificial)
            .fold(S::nil(), |acc, (r, _)| acc.add(&t.rhs[r]));
        if infeasibility.above_zero() {
            return Outcome::Infeasible;
        }
        // Drive zero-level artificials out where possible; rows where this
        // fails are redundant and stay inert.
        for r in 0..m {
            if t.kinds[t.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            if let Some(col) = (0..width)
                .find(|&j| t.kinds[j] != ColumnKind::Artificial && !t.rows[r][j].near_zero())
            {
                t.pivot(r, col);
            }
        }
    }

    // Phase 2.
    let cost: Vec<S> = t
        .kinds
        .iter()
        .map(|k| match k {
            ColumnKind::Plus(v) => objective[*v].clone(),
            ColumnKind::Minus(v) => objective[*v].neg(),
            _ => S::nil(),
        })
        .collect();
    t.price(&cost);
    if !t.optimize(|k| k != ColumnKind::Artificial) {
        return Outcome::Unbounded;
    }

    let mut primal = vec![S::nil(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        match t.kinds[b] {
            ColumnKind::Plus(v) => primal[v] = primal[v].add(&t.rhs[r]),
            ColumnKind::Minus(v) => primal[v] = primal[v].sub(&t.rhs[r]),
            _ => {}
        }
    }
    let dual = (0..m)
        .map(|r| {
            let y = t.reduced[identity[r]].clone();
            if flips[r] {
                y.neg()
            } else {
                y
            }
        })
        .collect();
    Outcome::Optimal { primal, dual }
}
