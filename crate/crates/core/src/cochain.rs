//! Cochains on vector fields with values in operators on symbols.
//!
//! A 1-cochain is a finite combination of atoms, each of which turns a
//! vector field into an [`EndOp`]. Two-cochains are built from 1-cochains by
//! the Chevalley–Eilenberg differential and the cup product. Equality is
//! decided by evaluation: operator values are compared in normal form, so
//! a vanishing value is zero on every symbol.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::ansatz::{SchemeCombination, SchemeDescriptor};
use crate::error::{Error, Result};
use crate::operator::EndOp;
use crate::poly::{Monomial, Polynomial};
use crate::rational::Rational;
use crate::symbol::{monomial_fields, monomial_symbols, VectorField};

/// Building blocks of 1-cochains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom1 {
    Scheme(SchemeDescriptor),
    /// `X ↦ [L_X, A]`.
    Coboundary(EndOp),
    /// `X ↦ multiplication by ∂^κ X`; the key must contain one `ξ` factor,
    /// e.g. `ξ_1` gives the component `X^1`.
    Jet(Monomial),
    /// `X ↦ L_X`.
    Lie,
}

impl Atom1 {
    fn eval(&self, x: &VectorField) -> EndOp {
        match self {
            Atom1::Scheme(d) => d.operator(x),
            Atom1::Coboundary(a) => EndOp::lie(x).commutator(a),
            Atom1::Jet(k) => EndOp::multiplication(x.value().partial_multi(k)),
            Atom1::Lie => EndOp::lie(x),
        }
    }

    fn x_order(&self) -> u32 {
        match self {
            Atom1::Scheme(d) => d.x_order(),
            Atom1::Coboundary(a) => a.orders().1.max(1),
            Atom1::Jet(k) => k.x_degree(),
            Atom1::Lie => 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cochain1 {
    terms: Vec<(Polynomial, Atom1)>,
}

impl Cochain1 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atom(a: Atom1) -> Self {
        Cochain1 {
            terms: alloc::vec![(Polynomial::one(), a)],
        }
    }

    pub fn from_schemes(c: &SchemeCombination) -> Self {
        Cochain1 {
            terms: c
                .terms()
                .iter()
                .map(|(d, p)| (p.clone(), Atom1::Scheme(*d)))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(Polynomial, Atom1)] {
        &self.terms
    }

    pub fn add(&mut self, c: Polynomial, a: Atom1) {
        if !c.is_zero() {
            self.terms.push((c, a));
        }
    }

    pub fn plus(&self, other: &Cochain1) -> Cochain1 {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn scaled(&self, c: &Polynomial) -> Cochain1 {
        Cochain1 {
            terms: self
                .terms
                .iter()
                .map(|(p, a)| (p * c, a.clone()))
                .filter(|(p, _)| !p.is_zero())
                .collect(),
        }
    }

    pub fn eval(&self, x: &VectorField) -> EndOp {
        let mut op = EndOp::zero();
        for (c, a) in self.terms.iter() {
            op.add_scaled(&a.eval(x), c);
        }
        op
    }

    /// Bound on the number of derivatives of `X` that the cochain reads.
    pub fn x_order(&self) -> u32 {
        self.terms.iter().map(|(_, a)| a.x_order()).max().unwrap_or(0)
    }
}

/// The cocycle `c_0` (multiplication by `Div X`), `c_1` or `c_2`.
pub fn standard_cocycle(i: usize) -> Cochain1 {
    Cochain1::from_schemes(&SchemeCombination::standard(i))
}

/// The coboundary of a 0-cochain: `X ↦ [L_X, A]`.
pub fn ce_diff0(a: &EndOp) -> Cochain1 {
    if a.is_zero() {
        return Cochain1::zero();
    }
    Cochain1::atom(Atom1::Coboundary(a.clone()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom2 {
    /// `δa(X,Y) = a([X,Y]) − [L_X, a(Y)] + [L_Y, a(X)]`.
    Diff(Box<Cochain1>),
    /// `⟦a,b⟧(X,Y) = −[a(X), b(Y)] + [a(Y), b(X)]`.
    Cup(Box<Cochain1>, Box<Cochain1>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cochain2 {
    terms: Vec<(Polynomial, Atom2)>,
}

pub fn ce_diff1(a: &Cochain1) -> Cochain2 {
    Cochain2 {
        terms: alloc::vec![(Polynomial::one(), Atom2::Diff(Box::new(a.clone())))],
    }
}

pub fn cup(a: &Cochain1, b: &Cochain1) -> Cochain2 {
    Cochain2 {
        terms: alloc::vec![(
            Polynomial::one(),
            Atom2::Cup(Box::new(a.clone()), Box::new(b.clone()))
        )],
    }
}

impl Cochain2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn plus(&self, other: &Cochain2) -> Cochain2 {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn scaled(&self, c: &Polynomial) -> Cochain2 {
        Cochain2 {
            terms: self
                .terms
                .iter()
                .map(|(p, a)| (p * c, a.clone()))
                .filter(|(p, _)| !p.is_zero())
                .collect(),
        }
    }

    pub fn eval(&self, x: &VectorField, y: &VectorField) -> Result<EndOp> {
        let mut op = EndOp::zero();
        for (c, a) in self.terms.iter() {
            let v = match a {
                Atom2::Diff(a) => {
                    let xy = x.bracket(y)?;
                    let mut v = a.eval(&xy);
                    v = &v - &EndOp::lie(x).commutator(&a.eval(y));
                    &v + &EndOp::lie(y).commutator(&a.eval(x))
                }
                Atom2::Cup(a, b) => {
                    let v = a.eval(x).commutator(&b.eval(y));
                    &a.eval(y).commutator(&b.eval(x)) - &v
                }
            };
            op.add_scaled(&v, c);
        }
        Ok(op)
    }

    pub fn x_order(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, a)| match a {
                Atom2::Diff(a) => a.x_order().max(1),
                Atom2::Cup(a, b) => a.x_order().max(b.x_order()),
            })
            .max()
            .unwrap_or(0)
    }
}

/// Where a cochain failed to vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub x: VectorField,
    pub y: Option<VectorField>,
    pub p: Polynomial,
    pub value: Polynomial,
}

/// Picks a symbol on which a nonzero operator does not vanish: the monomial
/// matching its smallest derivative key.
pub fn nonvanishing_symbol(op: &EndOp) -> Option<(Polynomial, Polynomial)> {
    let (key, _) = op.terms().next()?;
    let p = Polynomial::term(Rational::ONE, key.clone());
    let v = op.apply(&p);
    debug_assert!(!v.is_zero());
    Some((p, v))
}

/// Monomial vector fields of coefficient degree `≤ max_deg`, ordered by
/// degree, then exponent, then direction.
pub fn test_fields(dim: usize, max_deg: u32) -> Vec<VectorField> {
    (0..=max_deg).flat_map(|d| monomial_fields(dim, d)).collect()
}

/// Decides whether `a` vanishes on all monomial fields of degree
/// `≤ a.x_order() + 1`.
pub fn cochain1_is_zero(a: &Cochain1, dim: usize) -> core::result::Result<(), Witness> {
    cochain1_is_zero_on(a, &test_fields(dim, a.x_order() + 1))
}

pub fn cochain1_is_zero_on(a: &Cochain1, fields: &[VectorField]) -> core::result::Result<(), Witness> {
    for x in fields {
        let v = a.eval(x);
        if let Some((p, value)) = nonvanishing_symbol(&v) {
            return Err(Witness {
                x: x.clone(),
                y: None,
                p,
                value,
            });
        }
    }
    Ok(())
}

/// Decides whether `a` vanishes on all unordered pairs of monomial fields
/// of degree `≤ max_deg` (default `a.x_order() + 1`).
pub fn cochain2_is_zero(
    a: &Cochain2,
    dim: usize,
    max_deg: Option<u32>,
) -> Result<core::result::Result<usize, Witness>> {
    let fields = test_fields(dim, max_deg.unwrap_or(a.x_order() + 1));
    cochain2_is_zero_on(a, &fields)
}

/// Returns the number of pairs checked, or the first witness.
pub fn cochain2_is_zero_on(
    a: &Cochain2,
    fields: &[VectorField],
) -> Result<core::result::Result<usize, Witness>> {
    let mut n = 0;
    for (i, x) in fields.iter().enumerate() {
        for y in fields[i + 1..].iter() {
            n += 1;
            let v = a.eval(x, y)?;
            if let Some((p, value)) = nonvanishing_symbol(&v) {
                return Ok(Err(Witness {
                    x: x.clone(),
                    y: Some(y.clone()),
                    p,
                    value,
                }));
            }
        }
    }
    Ok(Ok(n))
}

/// A 1-cochain seen only on `𝒮_grade`, with the shifts it realizes there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPiece {
    pub grade: u32,
    /// Distinct shifts observed; empty when the piece vanishes.
    pub shifts: Vec<i64>,
    pub cochain: Cochain1,
}

impl GradedPiece {
    pub fn is_zero(&self) -> bool {
        self.shifts.is_empty()
    }

    /// Applies the piece at `x` to the grade-`grade` part of `p`.
    pub fn apply(&self, x: &VectorField, p: &Polynomial) -> Polynomial {
        self.cochain.eval(x).apply(&p.xi_homogeneous_part(self.grade))
    }
}

/// Restricts `a` to `𝒮_k` inside the window `[0, window]`.
pub fn restrict_grade(a: &Cochain1, k: u32, window: u32, dim: usize) -> Result<GradedPiece> {
    if k > window {
        return Err(Error::GradeOutOfWindow {
            grade: k as i64,
            max: window as usize,
        });
    }
    let mut shifts = BTreeSet::new();
    for x in test_fields(dim, a.x_order() + 1) {
        let op = a.eval(&x);
        let xord = op.orders().0;
        for xdeg in 0..=xord {
            for p in monomial_symbols(dim, xdeg, k) {
                for (g, _) in op.apply(&p).xi_grades() {
                    shifts.insert(k as i64 - g as i64);
                }
            }
        }
    }
    Ok(GradedPiece {
        grade: k,
        shifts: shifts.into_iter().collect(),
        cochain: a.clone(),
    })
}

/// Cohomological status of a 2-cochain value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CupClass {
    Zero,
    /// Equal to `δ` of this invariant combination.
    Coboundary(SchemeCombination),
    /// Nonzero and not `δ` of any invariant combination.
    Essential(Witness),
}

fn field_degree(f: &VectorField) -> u32 {
    f.value().terms().map(|(m, _)| m.x_degree()).max().unwrap_or(0)
}

/// Classifies `⟦c_i, c_j⟧`. A primitive is sought among the invariant
/// schemes of the matching shift by equating operator normal forms on
/// monomial field pairs, then certified on pairs one degree higher.
pub fn cup_class(i: usize, j: usize, dim: usize) -> Result<CupClass> {
    let w = cup(&standard_cocycle(i), &standard_cocycle(j));
    let witness = match cochain2_is_zero(&w, dim, None)? {
        Ok(_) => return Ok(CupClass::Zero),
        Err(wit) => wit,
    };
    let shift = (i + j) as i64;
    let columns = crate::ansatz::enumerate_schemes(2, shift)?;
    let deltas: Vec<Cochain2> = columns
        .iter()
        .map(|d| ce_diff1(&Cochain1::atom(Atom1::Scheme(*d))))
        .collect();
    let top = shift as u32 + 2;
    let fields = test_fields(dim, top + 1);
    let mut el = crate::linsolve::Eliminator::new(columns.len());
    for (a, x) in fields.iter().enumerate() {
        for y in fields[a + 1..].iter() {
            if field_degree(x) + field_degree(y) > top {
                continue;
            }
            let ops: Vec<EndOp> = deltas.iter().map(|d| d.eval(x, y)).collect::<Result<_>>()?;
            let target = w.eval(x, y)?;
            let mut slots = BTreeSet::new();
            for op in ops.iter().chain(core::iter::once(&target)) {
                for (key, c) in op.terms() {
                    for (m, _) in c.terms() {
                        slots.insert((key.clone(), m.clone()));
                    }
                }
            }
            for (key, m) in slots {
                let row = ops.iter().map(|op| op.coeff(&key).coeff(&m)).collect();
                el.push_row(row, Polynomial::constant(target.coeff(&key).coeff(&m)));
            }
        }
    }
    let sol = el.finish();
    if !sol.is_consistent() {
        return Ok(CupClass::Essential(witness));
    }
    let mut prim = SchemeCombination::new();
    for (d, c) in columns.iter().zip(sol.particular) {
        prim.add(*d, c);
    }
    let diff = ce_diff1(&Cochain1::from_schemes(&prim)).plus(&w.scaled(&Polynomial::constant(-Rational::ONE)));
    match cochain2_is_zero_on(&diff, &fields)? {
        Ok(_) => Ok(CupClass::Coboundary(prim)),
        Err(_) => Ok(CupClass::Essential(witness)),
    }
}
