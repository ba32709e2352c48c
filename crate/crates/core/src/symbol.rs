//! The graded symbol space `𝒮 = ⊕ 𝒮_k`: polynomials in `(x, ξ)` graded by
//! fiber degree, with the Poisson bracket, the Hamiltonian action of vector
//! fields, and the divergence operator `Div = ∂²/∂x^i∂ξ_i`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, VarId};
use crate::rational::Rational;

/// A parameter-free element of `𝒮` in dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    value: Polynomial,
    dim: usize,
}

fn check_vars(p: &Polynomial, dim: usize, allow_params: bool) -> Result<()> {
    for v in p.vars() {
        match v {
            VarId::X(i) | VarId::Xi(i) if i == 0 || i as usize > dim => {
                return Err(Error::IndexOutOfRange { var: v, dim })
            }
            VarId::Param(_) if !allow_params => return Err(Error::UnexpectedParameter(v)),
            _ => {}
        }
    }
    Ok(())
}

impl Symbol {
    pub fn new(value: Polynomial, dim: usize) -> Result<Self> {
        check_vars(&value, dim, false)?;
        Ok(Symbol { value, dim })
    }

    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        Symbol::new(Polynomial::parse(s)?, dim)
    }

    pub fn zero(dim: usize) -> Self {
        Symbol {
            value: Polynomial::zero(),
            dim,
        }
    }

    pub fn value(&self) -> &Polynomial {
        &self.value
    }

    pub fn into_value(self) -> Polynomial {
        self.value
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn same_dim(&self, other: &Symbol) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        self.same_dim(other)?;
        Ok(Symbol {
            value: &self.value * &other.value,
            dim: self.dim,
        })
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.value, f)
    }
}

/// A polynomial vector field `X = X^i(x) ξ_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField(Symbol);

impl VectorField {
    pub fn new(s: Symbol) -> Result<Self> {
        let ok = s.value.terms().all(|(m, _)| {
            m.xi_degree() == 1 && m.vars().all(|v| !matches!(v, VarId::Xi(_)) || m.exponent(v) <= 1)
        });
        if !ok {
            return Err(Error::NotVectorField);
        }
        Ok(VectorField(s))
    }

    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        VectorField::new(Symbol::parse(s, dim)?)
    }

    /// The monomial field `x^exps · ξ_dir` (direction is 1-based).
    pub fn monomial(exps: &[u32], dir: usize) -> Self {
        let dim = exps.len();
        assert!(dir >= 1 && dir <= dim);
        let m = Monomial::from_factors(
            exps.iter()
                .enumerate()
                .map(|(i, &e)| (VarId::X(i as u8 + 1), e))
                .chain(core::iter::once((VarId::Xi(dir as u8), 1))),
        );
        VectorField(Symbol {
            value: Polynomial::term(Rational::ONE, m),
            dim,
        })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.0
    }

    pub fn value(&self) -> &Polynomial {
        &self.0.value
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Lie bracket of vector fields, i.e. the Poisson bracket `{X, Y}`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        Ok(VectorField(poisson_bracket(&self.0, &other.0)?))
    }

    /// Components `X^i` as functions of `x`.
    pub fn components(&self) -> Vec<Polynomial> {
        (1..=self.dim())
            .map(|i| poly_partial(&self.0.value, VarId::Xi(i as u8)))
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        VectorField(Symbol {
            value: self.0.value.scale(c),
            dim: self.0.dim,
        })
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField(Symbol {
            value: &self.0.value + &other.0.value,
            dim: self.0.dim,
        })
    }

    /// Decomposes into monomial fields with their coefficients.
    pub fn monomial_terms(&self) -> Vec<(Rational, VectorField)> {
        self.0
            .value
            .terms()
            .map(|(m, c)| {
                (
                    c.clone(),
                    VectorField(Symbol {
                        value: Polynomial::term(Rational::ONE, m.clone()),
                        dim: self.0.dim,
                    }),
                )
            })
            .collect()
    }

    /// Classical divergence `∂_i X^i`.
    pub fn divergence(&self) -> Polynomial {
        div_poly(&self.0.value, self.dim())
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

pub(crate) fn poly_partial(p: &Polynomial, v: VarId) -> Polynomial {
    p.partial_unchecked(v)
}

/// Splits a symbol by fiber degree; zero pieces are omitted.
pub fn grade_decompose(s: &Symbol) -> BTreeMap<u32, Symbol> {
    s.value
        .xi_grades()
        .into_iter()
        .map(|(k, value)| (k, Symbol { value, dim: s.dim }))
        .collect()
}

/// `{a, b} = ∂a/∂ξ_i ∂b/∂x^i − ∂a/∂x^i ∂b/∂ξ_i` on raw polynomials.
pub(crate) fn poisson_poly(a: &Polynomial, b: &Polynomial, dim: usize) -> Polynomial {
    let mut out = Polynomial::zero();
    for i in 1..=dim {
        let (x, xi) = (VarId::X(i as u8), VarId::Xi(i as u8));
        let a_xi = a.partial_unchecked(xi);
        if !a_xi.is_zero() {
            let b_x = b.partial_unchecked(x);
            out = &out + &(&a_xi * &b_x);
        }
        let a_x = a.partial_unchecked(x);
        if !a_x.is_zero() {
            let b_xi = b.partial_unchecked(xi);
            out = &out - &(&a_x * &b_xi);
        }
    }
    out
}

pub fn poisson_bracket(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    a.same_dim(b)?;
    Ok(Symbol {
        value: poisson_poly(&a.value, &b.value, a.dim),
        dim: a.dim,
    })
}

/// The Hamiltonian action `L_X s = {X, s}`.
pub fn lie_derivative(x: &VectorField, s: &Symbol) -> Result<Symbol> {
    poisson_bracket(&x.0, s)
}

/// `Σ_i ∂²p/∂x^i∂ξ_i` on a raw polynomial.
pub(crate) fn div_poly(p: &Polynomial, dim: usize) -> Polynomial {
    let mut out = Polynomial::zero();
    for i in 1..=dim {
        let d = p
            .partial_unchecked(VarId::Xi(i as u8))
            .partial_unchecked(VarId::X(i as u8));
        out = &out + &d;
    }
    out
}

pub fn div_apply(s: &Symbol) -> Symbol {
    Symbol {
        value: div_poly(&s.value, s.dim),
        dim: s.dim,
    }
}

/// All monomials `x^a` in `dim` variables of total degree exactly `deg`,
/// as exponent vectors in lexicographic order.
pub fn exponent_vectors(dim: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == dim {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            rec(dim, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    rec(dim, deg, &mut Vec::new(), &mut out);
    out
}

/// Builds the monomial `x^a ξ^b`.
pub fn xxi_monomial(xexp: &[u32], xiexp: &[u32]) -> Monomial {
    Monomial::from_factors(
        xexp.iter()
            .enumerate()
            .map(|(i, &e)| (VarId::X(i as u8 + 1), e))
            .chain(
                xiexp
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (VarId::Xi(i as u8 + 1), e)),
            ),
    )
}

/// Monomial symbols `x^a ξ^b` with `|a| = xdeg`, `|b| = grade`.
pub fn monomial_symbols(dim: usize, xdeg: u32, grade: u32) -> Vec<Polynomial> {
    let mut out = Vec::new();
    for a in exponent_vectors(dim, xdeg) {
        for b in exponent_vectors(dim, grade) {
            out.push(Polynomial::term(Rational::ONE, xxi_monomial(&a, &b)));
        }
    }
    out
}

/// Monomial vector fields `x^a ξ_i` with `|a| = xdeg`, all directions.
pub fn monomial_fields(dim: usize, xdeg: u32) -> Vec<VectorField> {
    let mut out = Vec::new();
    for a in exponent_vectors(dim, xdeg) {
        for i in 1..=dim {
            out.push(VectorField::monomial(&a, i));
        }
    }
    out
}
