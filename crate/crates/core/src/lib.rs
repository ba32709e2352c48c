//! Exact symbolic engine for multi-parameter formal deformations of the
//! `Vect(ℝⁿ)`-module of symbols.
//!
//! Everything is computed over ℚ with polynomial coefficients: cocycles and
//! cup products on the symbol space, order-by-order Maurer–Cartan solving
//! in a GL(n)-invariant operator ansatz, the resulting relation ideals, and
//! the differential-operator modules `D_{λ,μ}` with their Weyl-symbol
//! parameters.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ansatz;
pub mod cochain;
pub mod deformation;
pub mod density;
pub mod error;
pub mod ideal;
pub mod linsolve;
pub mod operator;
pub mod poly;
pub mod rational;
pub mod symbol;

pub use ansatz::{enumerate_schemes, SchemeCombination, SchemeDescriptor, SchemeFamily};
pub use error::{Error, Result};
pub use linsolve::{solve_affine, AffineSolution, Eliminator, LinearSystem, RelationSpan};
pub use operator::EndOp;
pub use poly::{Family, Monomial, Param, Polynomial, VarId};
pub use rational::Rational;
pub use symbol::{div_apply, grade_decompose, lie_derivative, poisson_bracket, Symbol, VectorField};
