//! Exact affine solving over ℚ with polynomial right-hand sides.
//!
//! Right-hand-side entries are treated as opaque elements of the ℚ-vector
//! space of polynomials: row operations only ever scale and add them. Rows
//! whose matrix part eliminates to zero leave behind a polynomial that must
//! vanish for the system to be solvable; the span of those polynomials is
//! reported as the compatibility relations.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::poly::{Monomial, Polynomial};
use crate::rational::Rational;

/// A matrix with rational entries and a column of polynomial right-hand
/// sides.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub cols: usize,
    pub matrix: Vec<Vec<Rational>>,
    pub rhs: Vec<Polynomial>,
}

impl LinearSystem {
    pub fn new(cols: usize) -> Self {
        LinearSystem {
            cols,
            matrix: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Rational>, rhs: Polynomial) {
        assert_eq!(row.len(), self.cols, "row length must match column count");
        self.matrix.push(row);
        self.rhs.push(rhs);
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }
}

/// Output of [`solve_affine`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    /// Solution with every free variable set to zero.
    pub particular: Vec<Polynomial>,
    /// Basis of the homogeneous solutions, one vector per free column.
    pub nullspace: Vec<Vec<Rational>>,
    /// Reduced echelon basis of the span of the compatibility conditions.
    pub relations: Vec<Polynomial>,
    /// Pivot columns in increasing order.
    pub pivots: Vec<usize>,
}

impl AffineSolution {
    pub fn is_consistent(&self) -> bool {
        self.relations.is_empty()
    }
}

/// Solves `matrix · x = rhs` exactly.
pub fn solve_affine(sys: &LinearSystem) -> AffineSolution {
    let mut el = Eliminator::new(sys.cols);
    for (row, rhs) in sys.matrix.iter().zip(sys.rhs.iter()) {
        el.push_row(row.clone(), rhs.clone());
    }
    el.finish()
}

struct PivotRow {
    col: usize,
    row: Vec<Rational>,
    rhs: Polynomial,
}

/// Streaming row reduction: rows are consumed one at a time so that large
/// systems never have to be materialized.
///
/// Pivots are chosen deterministically: a row's pivot is its first nonzero
/// column after reduction, and the earliest such row claims the column.
pub struct Eliminator {
    cols: usize,
    /// Indexed by pivot column.
    pivots: Vec<Option<PivotRow>>,
    relations: RelationSpan,
    rows_seen: usize,
}

impl Eliminator {
    pub fn new(cols: usize) -> Self {
        Eliminator {
            cols,
            pivots: (0..cols).map(|_| None).collect(),
            relations: RelationSpan::default(),
            rows_seen: 0,
        }
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn rank(&self) -> usize {
        self.pivots.iter().filter(|p| p.is_some()).count()
    }

    pub fn push_row(&mut self, mut row: Vec<Rational>, mut rhs: Polynomial) {
        assert_eq!(row.len(), self.cols, "row length must match column count");
        self.rows_seen += 1;
        for c in 0..self.cols {
            if row[c].is_zero() {
                continue;
            }
            match &self.pivots[c] {
                Some(p) => {
                    let f = row[c].clone();
                    for j in c..self.cols {
                        if !p.row[j].is_zero() {
                            row[j] = &row[j] - &(&f * &p.row[j]);
                        }
                    }
                    rhs.add_scaled(&p.rhs, &-f, &Monomial::one());
                }
                None => {
                    let inv = row[c].recip();
                    for v in row[c..].iter_mut() {
                        *v = &*v * &inv;
                    }
                    let rhs = rhs.scale(&inv);
                    self.pivots[c] = Some(PivotRow { col: c, row, rhs });
                    return;
                }
            }
        }
        self.relations.insert(rhs);
    }

    /// Back-substitutes to reduced echelon form and extracts the solution.
    pub fn finish(self) -> AffineSolution {
        let cols = self.cols;
        let mut rows: Vec<PivotRow> = self.pivots.into_iter().flatten().collect();
        // Clear entries above each pivot, last pivot first.
        for i in (0..rows.len()).rev() {
            let (head, tail) = rows.split_at_mut(i);
            let p = &tail[0];
            for q in head.iter_mut() {
                let f = q.row[p.col].clone();
                if f.is_zero() {
                    continue;
                }
                for j in p.col..cols {
                    if !p.row[j].is_zero() {
                        q.row[j] = &q.row[j] - &(&f * &p.row[j]);
                    }
                }
                q.rhs.add_scaled(&p.rhs, &-f, &Monomial::one());
            }
        }
        let pivots: Vec<usize> = rows.iter().map(|r| r.col).collect();
        let mut particular = vec![Polynomial::zero(); cols];
        for r in rows.iter() {
            particular[r.col] = r.rhs.clone();
        }
        let mut nullspace = Vec::new();
        for f in (0..cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::ZERO; cols];
            v[f] = Rational::ONE;
            for r in rows.iter() {
                v[r.col] = -&r.row[f];
            }
            nullspace.push(v);
        }
        AffineSolution {
            particular,
            nullspace,
            relations: self.relations.into_basis(),
            pivots,
        }
    }
}

/// A reduced echelon basis of a ℚ-subspace of polynomials, keyed by
/// leading monomial.
#[derive(Clone, Debug, Default)]
pub struct RelationSpan {
    basis: BTreeMap<Monomial, Polynomial>,
}

impl RelationSpan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reduces `p` against the basis.
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        let mut rest = p.clone();
        let mut out = Polynomial::zero();
        while let Some((m, c)) = rest.leading().map(|(m, c)| (m.clone(), c.clone())) {
            match self.basis.get(&m) {
                Some(b) => rest.add_scaled(b, &-c, &Monomial::one()),
                None => {
                    rest.add_term(m.clone(), &-c.clone());
                    out.add_term(m, &c);
                }
            }
        }
        out
    }

    /// Adds `p` to the span; returns `false` if it was already contained.
    pub fn insert(&mut self, p: Polynomial) -> bool {
        let r = self.reduce(&p);
        let Some((lead, _)) = r.leading() else {
            return false;
        };
        let lead = lead.clone();
        let r = r.monic();
        for b in self.basis.values_mut() {
            let c = b.coeff(&lead);
            if !c.is_zero() {
                b.add_scaled(&r, &-c, &Monomial::one());
            }
        }
        self.basis.insert(lead, r);
        true
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis elements ordered by descending leading monomial.
    pub fn into_basis(self) -> Vec<Polynomial> {
        self.basis.into_values().rev().collect()
    }

    pub fn basis(&self) -> impl Iterator<Item = &Polynomial> {
        self.basis.values().rev()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn single_scalar_equation() {
        let mut sys = LinearSystem::new(1);
        sys.push_row(vec![q(3)], p("-2*t1[3]*t1[4]"));
        let sol = solve_affine(&sys);
        assert_eq!(sol.particular, vec![p("-2/3*t1[3]*t1[4]")]);
        assert!(sol.relations.is_empty());
        assert!(sol.nullspace.is_empty());
    }

    #[test]
    fn duplicated_row_forces_equality() {
        let mut sys = LinearSystem::new(1);
        sys.push_row(vec![q(1)], p("tau0"));
        sys.push_row(vec![q(1)], p("tau1"));
        let sol = solve_affine(&sys);
        assert_eq!(sol.relations.len(), 1);
        let r = &sol.relations[0];
        assert!(r == &p("tau0 - tau1") || r == &p("tau1 - tau0"));
    }

    #[test]
    fn zero_system() {
        let mut sys = LinearSystem::new(1);
        sys.push_row(vec![q(0)], Polynomial::zero());
        let sol = solve_affine(&sys);
        assert_eq!(sol.particular, vec![Polynomial::zero()]);
        assert!(sol.relations.is_empty());
        assert_eq!(sol.nullspace, vec![vec![q(1)]]);
    }

    #[test]
    fn free_variables_are_zero_and_nullspace_is_homogeneous() {
        // x0 + x1 = a, x1 + x2 = b
        let mut sys = LinearSystem::new(3);
        sys.push_row(vec![q(1), q(1), q(0)], p("lam"));
        sys.push_row(vec![q(0), q(1), q(1)], p("mu"));
        let sol = solve_affine(&sys);
        assert_eq!(sol.pivots, vec![0, 1]);
        assert_eq!(sol.particular, vec![p("lam - mu"), p("mu"), Polynomial::zero()]);
        assert_eq!(sol.nullspace, vec![vec![q(1), q(-1), q(1)]]);
    }

    #[test]
    fn relation_span_is_reduced() {
        let mut s = RelationSpan::new();
        assert!(s.insert(p("lam + mu")));
        assert!(s.insert(p("mu")));
        assert!(!s.insert(p("2*lam + 3*mu")));
        let b = s.into_basis();
        assert_eq!(b, vec![p("mu"), p("lam")]);
    }
}
