//! Differential operators on the symbol space in normal form.
//!
//! An [`EndOp`] is a finite sum `Σ c_κ(x, ξ, t) ∂^κ` where the derivative
//! key `κ` is stored as a [`Monomial`] over the `X`/`Xi` variables: a factor
//! `x_i^e` stands for `∂^e/∂(x^i)^e` and `ξ_i^e` for `∂^e/∂ξ_i^e`.
//! Coefficients sit to the left of derivatives, so two operators are equal
//! exactly when their term maps are.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::poly::{write_term, Monomial, Polynomial, VarId};
use crate::rational::Rational;
use crate::symbol::VectorField;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct EndOp {
    terms: BTreeMap<Monomial, Polynomial>,
}

impl EndOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        EndOp::multiplication(Polynomial::one())
    }

    /// Multiplication by `p`.
    pub fn multiplication(p: Polynomial) -> Self {
        EndOp::term(p, Monomial::one())
    }

    /// `c · ∂^key`.
    pub fn term(c: Polynomial, key: Monomial) -> Self {
        let mut op = EndOp::zero();
        op.add_term(key, c);
        op
    }

    /// `∂/∂x^i` (1-based).
    pub fn dx(i: usize) -> Self {
        EndOp::term(Polynomial::one(), Monomial::var(VarId::X(i as u8)))
    }

    /// `∂/∂ξ_i` (1-based).
    pub fn dxi(i: usize) -> Self {
        EndOp::term(Polynomial::one(), Monomial::var(VarId::Xi(i as u8)))
    }

    /// The Hamiltonian action `L_X = ∂X/∂ξ_i ∂/∂x^i − ∂X/∂x^i ∂/∂ξ_i`.
    pub fn lie(x: &VectorField) -> Self {
        let mut op = EndOp::zero();
        for i in 1..=x.dim() {
            let (xv, xiv) = (VarId::X(i as u8), VarId::Xi(i as u8));
            op.add_term(Monomial::var(xv), x.value().partial_unchecked(xiv));
            op.add_term(Monomial::var(xiv), -x.value().partial_unchecked(xv));
        }
        op
    }

    /// `Div = Σ ∂²/∂x^i∂ξ_i`.
    pub fn div(dim: usize) -> Self {
        let mut op = EndOp::zero();
        for i in 1..=dim {
            let key = Monomial::from_factors([(VarId::X(i as u8), 1), (VarId::Xi(i as u8), 1)]);
            op.add_term(key, Polynomial::one());
        }
        op
    }

    pub fn add_term(&mut self, key: Monomial, c: Polynomial) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(derivative key, coefficient)` pairs in ascending key order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Polynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &Monomial) -> Polynomial {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &Rational) -> EndOp {
        if c.is_zero() {
            return EndOp::zero();
        }
        EndOp {
            terms: self.terms.iter().map(|(k, p)| (k.clone(), p.scale(c))).collect(),
        }
    }

    /// Left multiplication by a polynomial in the parameters only.
    pub fn scale_poly(&self, p: &Polynomial) -> EndOp {
        let mut out = EndOp::zero();
        for (k, c) in self.terms.iter() {
            out.add_term(k.clone(), c * p);
        }
        out
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &EndOp, c: &Polynomial) {
        for (k, p) in other.terms.iter() {
            self.add_term(k.clone(), p * c);
        }
    }

    /// Highest number of `x`- and `ξ`-derivatives in any term.
    pub fn orders(&self) -> (u32, u32) {
        self.terms.keys().fold((0, 0), |(a, b), k| {
            (a.max(k.x_degree()), b.max(k.xi_degree()))
        })
    }

    pub fn map_coeffs<F: FnMut(&Polynomial) -> Polynomial>(&self, mut f: F) -> EndOp {
        let mut out = EndOp::zero();
        for (k, c) in self.terms.iter() {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    pub fn apply(&self, s: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (k, c) in self.terms.iter() {
            let d = s.partial_multi(k);
            if !d.is_zero() {
                out = &out + &(c * &d);
            }
        }
        out
    }

    /// Normal form of `self ∘ other` by the Leibniz rule.
    pub fn compose(&self, other: &EndOp) -> EndOp {
        let mut out = EndOp::zero();
        for (ka, ca) in self.terms.iter() {
            let subs = sub_keys(ka);
            for (kb, cb) in other.terms.iter() {
                for (g, binom) in subs.iter() {
                    let dcb = cb.partial_multi(g);
                    if dcb.is_zero() {
                        continue;
                    }
                    let rest = ka.div(g).expect("sub-key divides key");
                    let key = rest.mul(kb);
                    out.add_term(key, (ca * &dcb).scale(binom));
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &EndOp) -> EndOp {
        &self.compose(other) - &other.compose(self)
    }

    /// Splits by degree shift: piece `d` maps `𝒮_k` into `𝒮_{k−d}`.
    pub fn shift_decompose(&self) -> BTreeMap<i64, EndOp> {
        let mut out: BTreeMap<i64, EndOp> = BTreeMap::new();
        for (k, c) in self.terms.iter() {
            for (m, v) in c.terms() {
                let d = k.xi_degree() as i64 - m.xi_degree() as i64;
                out.entry(d)
                    .or_default()
                    .add_term(k.clone(), Polynomial::term(v.clone(), m.clone()));
            }
        }
        out
    }
}

/// All sub-multi-indices `γ ≤ κ` with the product of binomials `C(κ, γ)`.
fn sub_keys(key: &Monomial) -> Vec<(Monomial, Rational)> {
    let mut out = alloc::vec![(Monomial::one(), 1i64)];
    for &(v, e) in key.factors() {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for (m, b) in out.iter() {
            let mut binom = 1i64;
            for j in 0..=e {
                next.push((m.mul(&Monomial::var_pow(v, j)), b * binom));
                binom = binom * (e - j) as i64 / (j + 1) as i64;
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(m, b)| (m, Rational::from_integer(b)))
        .collect()
}

impl core::ops::Add for &EndOp {
    type Output = EndOp;
    fn add(self, rhs: &EndOp) -> EndOp {
        let mut out = self.clone();
        for (k, c) in rhs.terms.iter() {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl core::ops::Sub for &EndOp {
    type Output = EndOp;
    fn sub(self, rhs: &EndOp) -> EndOp {
        let mut out = self.clone();
        for (k, c) in rhs.terms.iter() {
            out.add_term(k.clone(), -c);
        }
        out
    }
}

impl core::ops::Neg for &EndOp {
    type Output = EndOp;
    fn neg(self) -> EndOp {
        self.scale(&Rational::from_integer(-1))
    }
}

fn key_string(k: &Monomial) -> String {
    let mut s = String::new();
    for (i, &(v, e)) in k.factors().iter().enumerate() {
        if i > 0 {
            s.push('*');
        }
        let _ = match v {
            VarId::X(j) => write!(s, "dx{j}"),
            VarId::Xi(j) => write!(s, "dxi{j}"),
            VarId::Param(_) => write!(s, "d{v}"),
        };
        if e > 1 {
            let _ = write!(s, "^{e}");
        }
    }
    s
}

/// Terms joined with ` + ` / ` - `, e.g. `x1*dxi1 + 2*dx1^2*dxi2`.
impl fmt::Display for EndOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_char('0');
        }
        let mut first = true;
        for (k, c) in self.terms.iter() {
            let ks = key_string(k);
            if c.len() == 1 || k.is_one() {
                for (m, v) in c.terms().rev() {
                    let mut body = if m.is_one() { String::new() } else { m.to_string() };
                    if !ks.is_empty() {
                        if !body.is_empty() {
                            body.push('*');
                        }
                        body.push_str(&ks);
                    }
                    write_term(f, v, &body, first, true)?;
                    first = false;
                }
            } else {
                if !first {
                    f.write_str(" + ")?;
                }
                write!(f, "({c})*{ks}")?;
                first = false;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for EndOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
