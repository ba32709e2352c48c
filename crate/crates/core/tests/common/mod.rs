#![allow(dead_code)]

use proptest::prelude::*;
use symdef_core::symbol::xxi_monomial;
use symdef_core::{EndOp, Polynomial, Rational, Symbol, VectorField};

pub const N: usize = 2;

fn exps(max: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max, N)
}

/// Symbols in `x_1, x_2, ξ_1, ξ_2` with small integer coefficients.
pub fn symbol(max_exp: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-3i64..=3, exps(max_exp), exps(max_exp)), 0..=max_terms).prop_map(|ts| {
        ts.into_iter().fold(Polynomial::zero(), |acc, (c, x, xi)| {
            &acc + &Polynomial::term(Rational::from(c), xxi_monomial(&x, &xi))
        })
    })
}

pub fn wrapped(max_exp: u32, max_terms: usize) -> impl Strategy<Value = Symbol> {
    symbol(max_exp, max_terms).prop_map(|p| Symbol::new(p, N).unwrap())
}

/// Polynomial vector fields with components of degree `≤ max_deg`.
pub fn field(max_deg: u32) -> impl Strategy<Value = VectorField> {
    prop::collection::vec((-2i64..=2, exps(max_deg), 1..=N), 1..=3).prop_map(|ts| {
        ts.into_iter().fold(VectorField::new(Symbol::zero(N)).unwrap(), |acc, (c, x, dir)| {
            acc.add(&VectorField::monomial(&x, dir).scale(&Rational::from(c)))
        })
    })
}

/// Differential operators with a few terms of order `≤ 2` in each kind.
pub fn operator() -> impl Strategy<Value = EndOp> {
    prop::collection::vec((symbol(1, 2), exps(1), exps(2)), 0..=3).prop_map(|ts| {
        ts.into_iter().fold(EndOp::zero(), |acc, (c, dx, dxi)| {
            &acc + &EndOp::term(c, xxi_monomial(&dx, &dxi))
        })
    })
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Rational::new(n, d))
}
