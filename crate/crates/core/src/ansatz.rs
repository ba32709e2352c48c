//! GL(n)-invariant operator schemes.
//!
//! Each descriptor `A(s,u)`, `B(s,u)`, `C(s,u)` turns a vector field into a
//! constant-coefficient contraction of derivatives of `X` against
//! derivatives of the argument, using `s` contracted indices. All three
//! families lower the fiber degree by `s − 1`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::operator::EndOp;
use crate::poly::{Monomial, Polynomial, VarId};
use crate::rational::Rational;
use crate::symbol::{exponent_vectors, xxi_monomial, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeFamily {
    /// `∂^{s−u}X · ∂_x^u ∂_ξ^s`, all indices of `X` contracted with `ξ`.
    A,
    /// `∂^{s−u}_x ∂_{ξ_{i_1}} X · ∂_x^u ∂_ξ^{s−1}`, a trace inside `X`.
    B,
    /// `∂^{s−u−1}_x ∂_{ξ_c} X · ∂_{x^c} ∂_x^u ∂_ξ^{s−1}`, the `ξ`-index of `X`
    /// contracted with an argument `x`-derivative.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemeDescriptor {
    pub family: SchemeFamily,
    pub s: u32,
    pub u: u32,
}

impl SchemeDescriptor {
    pub fn new(family: SchemeFamily, s: u32, u: u32) -> Result<Self> {
        let ok = match family {
            SchemeFamily::A => u <= s,
            SchemeFamily::B | SchemeFamily::C => s >= 1 && u < s,
        };
        if !ok {
            return Err(Error::InvalidDescriptor(format!("{family:?}({s},{u})")));
        }
        Ok(SchemeDescriptor { family, s, u })
    }

    pub fn a(s: u32, u: u32) -> Self {
        Self::new(SchemeFamily::A, s, u).expect("valid A descriptor")
    }

    pub fn b(s: u32, u: u32) -> Self {
        Self::new(SchemeFamily::B, s, u).expect("valid B descriptor")
    }

    pub fn c(s: u32, u: u32) -> Self {
        Self::new(SchemeFamily::C, s, u).expect("valid C descriptor")
    }

    /// Fiber-degree shift: the image of `𝒮_k` lies in `𝒮_{k−shift}`.
    pub fn shift(&self) -> i64 {
        self.s as i64 - 1
    }

    /// Number of derivatives taken of `X`.
    pub fn x_order(&self) -> u32 {
        match self.family {
            SchemeFamily::A | SchemeFamily::C => self.s - self.u,
            SchemeFamily::B => self.s - self.u + 1,
        }
    }

    /// Number of derivatives taken of the argument.
    pub fn arg_order(&self) -> u32 {
        match self.family {
            SchemeFamily::A => self.s + self.u,
            SchemeFamily::B => self.s - 1 + self.u,
            SchemeFamily::C => self.s + self.u,
        }
    }

    /// The operator this scheme assigns to `x`.
    pub fn operator(&self, x: &VectorField) -> EndOp {
        let n = x.dim();
        let (s, u) = (self.s, self.u);
        let mut op = EndOp::zero();
        let xv = x.value();
        match self.family {
            SchemeFamily::A => {
                for a in exponent_vectors(n, s - u) {
                    let dx = xv.partial_multi(&xxi_monomial(&a, &[]));
                    if dx.is_zero() {
                        continue;
                    }
                    for b in exponent_vectors(n, u) {
                        let w = multinomial(&a) * multinomial(&b);
                        let key = xxi_monomial(&b, &add(&a, &b));
                        op.add_term(key, dx.scale(&Rational::from_integer(w)));
                    }
                }
            }
            SchemeFamily::B | SchemeFamily::C => {
                for c in 0..n {
                    let xi_c = Monomial::var(VarId::Xi(c as u8 + 1));
                    for a in exponent_vectors(n, s - u - 1) {
                        let xkey = if self.family == SchemeFamily::B {
                            add(&a, &unit(n, c))
                        } else {
                            a.clone()
                        };
                        let dx = xv.partial_multi(&xxi_monomial(&xkey, &[]).mul(&xi_c));
                        if dx.is_zero() {
                            continue;
                        }
                        for b in exponent_vectors(n, u) {
                            let w = multinomial(&a) * multinomial(&b);
                            let key = if self.family == SchemeFamily::B {
                                xxi_monomial(&b, &add(&a, &b))
                            } else {
                                xxi_monomial(&add(&b, &unit(n, c)), &add(&a, &b))
                            };
                            op.add_term(key, dx.scale(&Rational::from_integer(w)));
                        }
                    }
                }
            }
        }
        op
    }
}

fn add(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn unit(n: usize, c: usize) -> Vec<u32> {
    let mut v = alloc::vec![0; n];
    v[c] = 1;
    v
}

/// Number of index tuples realizing the multiset with multiplicities `a`.
fn multinomial(a: &[u32]) -> i64 {
    let mut num = 1i64;
    let mut k = 0i64;
    for &e in a {
        for j in 1..=e as i64 {
            k += 1;
            num = num * k / j;
        }
    }
    num
}

impl fmt::Display for SchemeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({},{})", self.family, self.s, self.u)
    }
}

impl FromStr for SchemeDescriptor {
    type Err = Error;
    fn from_str(t: &str) -> Result<Self> {
        let bad = || Error::InvalidDescriptor(String::from(t));
        let t = t.trim();
        let fam = match t.chars().next() {
            Some('A') => SchemeFamily::A,
            Some('B') => SchemeFamily::B,
            Some('C') => SchemeFamily::C,
            _ => return Err(bad()),
        };
        let inner = t[1..]
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (s, u) = inner.split_once(',').ok_or_else(bad)?;
        let s = s.trim().parse().map_err(|_| bad())?;
        let u = u.trim().parse().map_err(|_| bad())?;
        SchemeDescriptor::new(fam, s, u)
    }
}

/// All descriptors usable at order `m` with the given shift, in
/// `(family, s, u)` order. Only `s = shift + 1 ≤ 3m` qualifies.
pub fn enumerate_schemes(m: u32, shift: i64) -> Result<Vec<SchemeDescriptor>> {
    if m == 0 {
        return Err(Error::InvalidConfig(String::from("order must be at least 1")));
    }
    let s = shift + 1;
    if s < 0 || s > 3 * m as i64 {
        return Ok(Vec::new());
    }
    let s = s as u32;
    let mut out: Vec<SchemeDescriptor> = (0..=s).map(|u| SchemeDescriptor::a(s, u)).collect();
    if s >= 1 {
        out.extend((0..s).map(|u| SchemeDescriptor::b(s, u)));
        out.extend((0..s).map(|u| SchemeDescriptor::c(s, u)));
    }
    Ok(out)
}

/// A linear combination of descriptors with parameter coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemeCombination {
    terms: Vec<(SchemeDescriptor, Polynomial)>,
}

impl SchemeCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(d: SchemeDescriptor) -> Self {
        let mut c = Self::new();
        c.add(d, Polynomial::one());
        c
    }

    pub fn add(&mut self, d: SchemeDescriptor, c: Polynomial) {
        match self.terms.binary_search_by(|(e, _)| e.cmp(&d)) {
            Ok(i) => {
                let sum = &self.terms[i].1 + &c;
                if sum.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].1 = sum;
                }
            }
            Err(i) if !c.is_zero() => self.terms.insert(i, (d, c)),
            Err(_) => {}
        }
    }

    pub fn terms(&self) -> &[(SchemeDescriptor, Polynomial)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn operator(&self, x: &VectorField) -> EndOp {
        let mut op = EndOp::zero();
        for (d, c) in self.terms.iter() {
            op.add_scaled(&d.operator(x), c);
        }
        op
    }

    /// The cocycle `c_i` for `i ∈ {0, 1, 2}`.
    pub fn standard(i: usize) -> Self {
        let mut c = Self::new();
        match i {
            0 => c.add(SchemeDescriptor::b(1, 0), Polynomial::one()),
            1 => c.add(SchemeDescriptor::a(2, 0), Polynomial::one()),
            2 => {
                c.add(SchemeDescriptor::a(3, 0), Polynomial::one());
                c.add(SchemeDescriptor::c(3, 0), Polynomial::constant(Rational::from_integer(-3)));
            }
            _ => panic!("standard cocycles are indexed 0, 1, 2"),
        }
        c
    }
}
