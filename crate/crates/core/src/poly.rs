//! Multivariate polynomials over ℚ in named variables.
//!
//! Variables come in three namespaces: coordinates `x1..xn`, fiber
//! variables `xi1..xin`, and formal parameters (`t0[k]`, `t1[k]`, `t2[k]`,
//! `tau0..tau2`, `lam`, `mu`). The global variable order is coordinates,
//! then fibers, then parameters sorted by (grade, family). Monomials are
//! compared graded-lexicographically with the largest variable most
//! significant.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write as _};
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Parameter families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    T0,
    T1,
    T2,
    Tau0,
    Tau1,
    Tau2,
    Lambda,
    Mu,
}

impl Family {
    /// Family tag of the graded parameter `t_i`.
    pub fn t(i: usize) -> Family {
        match i {
            0 => Family::T0,
            1 => Family::T1,
            2 => Family::T2,
            _ => panic!("no parameter family t{i}"),
        }
    }

    pub fn tau(i: usize) -> Family {
        match i {
            0 => Family::Tau0,
            1 => Family::Tau1,
            2 => Family::Tau2,
            _ => panic!("no parameter family tau{i}"),
        }
    }

    pub fn is_graded(self) -> bool {
        matches!(self, Family::T0 | Family::T1 | Family::T2)
    }

    /// Cocycle index (shift) carried by `t_i` / `tau_i`.
    pub fn cocycle_index(self) -> Option<usize> {
        match self {
            Family::T0 | Family::Tau0 => Some(0),
            Family::T1 | Family::Tau1 => Some(1),
            Family::T2 | Family::Tau2 => Some(2),
            _ => None,
        }
    }

    /// `i` for `t_i`.
    pub fn t_index(self) -> Option<usize> {
        if self.is_graded() {
            self.cocycle_index()
        } else {
            None
        }
    }

    /// `i` for `τ_i`.
    pub fn tau_index(self) -> Option<usize> {
        match self {
            Family::Tau0 | Family::Tau1 | Family::Tau2 => self.cocycle_index(),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Family::T0 => "t0",
            Family::T1 => "t1",
            Family::T2 => "t2",
            Family::Tau0 => "tau0",
            Family::Tau1 => "tau1",
            Family::Tau2 => "tau2",
            Family::Lambda => "lam",
            Family::Mu => "mu",
        }
    }
}

/// A formal parameter. Ungraded families carry grade 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub family: Family,
    pub grade: u16,
}

impl Ord for Param {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.grade, self.family).cmp(&(other.grade, other.family))
    }
}

impl PartialOrd for Param {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A variable. Coordinate and fiber indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    X(u8),
    Xi(u8),
    Param(Param),
}

impl VarId {
    /// `t_i^k`.
    pub fn t(i: usize, grade: usize) -> VarId {
        VarId::Param(Param {
            family: Family::t(i),
            grade: grade as u16,
        })
    }

    pub fn tau(i: usize) -> VarId {
        VarId::Param(Param {
            family: Family::tau(i),
            grade: 0,
        })
    }

    pub fn lambda() -> VarId {
        VarId::Param(Param {
            family: Family::Lambda,
            grade: 0,
        })
    }

    pub fn mu() -> VarId {
        VarId::Param(Param {
            family: Family::Mu,
            grade: 0,
        })
    }

    pub fn is_param(self) -> bool {
        matches!(self, VarId::Param(_))
    }

    pub fn param(self) -> Option<Param> {
        match self {
            VarId::Param(p) => Some(p),
            _ => None,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::X(i) => write!(f, "x{i}"),
            VarId::Xi(i) => write!(f, "xi{i}"),
            VarId::Param(p) if p.family.is_graded() => {
                write!(f, "{}[{}]", p.family.name(), p.grade)
            }
            VarId::Param(p) => f.write_str(p.family.name()),
        }
    }
}

type Factors = SmallVec<[(VarId, u32); 4]>;

/// A power product, stored as `(variable, exponent)` pairs sorted by
/// variable with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Factors);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: VarId) -> Self {
        Self::var_pow(v, 1)
    }

    pub fn var_pow(v: VarId, e: u32) -> Self {
        let mut f = SmallVec::new();
        if e > 0 {
            f.push((v, e));
        }
        Monomial(f)
    }

    /// Builds a monomial from arbitrary factors, merging repeats.
    pub fn from_factors<I: IntoIterator<Item = (VarId, u32)>>(it: I) -> Self {
        let mut f: Factors = it.into_iter().filter(|(_, e)| *e > 0).collect();
        f.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Factors = SmallVec::new();
        for (v, e) in f {
            match out.last_mut() {
                Some((w, k)) if *w == v => *k += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn factors(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    /// Total degree in the fiber variables.
    pub fn xi_degree(&self) -> u32 {
        self.0
            .iter()
            .filter(|(v, _)| matches!(v, VarId::Xi(_)))
            .map(|(_, e)| e)
            .sum()
    }

    pub fn x_degree(&self) -> u32 {
        self.0
            .iter()
            .filter(|(v, _)| matches!(v, VarId::X(_)))
            .map(|(_, e)| e)
            .sum()
    }

    pub fn has_params(&self) -> bool {
        self.0.iter().any(|(v, _)| v.is_param())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out: Factors = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for &(v, e) in other.0.iter() {
            let i = out.binary_search_by(|(w, _)| w.cmp(&v)).ok()?;
            if out[i].1 < e {
                return None;
            }
            out[i].1 -= e;
        }
        out.retain(|(_, e)| *e > 0);
        Some(Monomial(out))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(v, e)| other.exponent(v) >= e)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut f: Factors = self.0.clone();
        for &(v, e) in other.0.iter() {
            match f.binary_search_by(|(w, _)| w.cmp(&v)) {
                Ok(i) => f[i].1 = f[i].1.max(e),
                Err(i) => f.insert(i, (v, e)),
            }
        }
        Monomial(f)
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(v, _)| other.exponent(v) == 0)
    }

    /// Removes one power of `v`, returning the former exponent (0 if absent).
    fn lower(&self, v: VarId) -> (u32, Monomial) {
        match self.0.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => {
                let e = self.0[i].1;
                let mut f = self.0.clone();
                if e == 1 {
                    f.remove(i);
                } else {
                    f[i].1 -= 1;
                }
                (e, Monomial(f))
            }
            Err(_) => (0, self.clone()),
        }
    }

    /// Splits into the (x, ξ) part and the parameter part.
    pub fn split_params(&self) -> (Monomial, Monomial) {
        let (p, s): (Factors, Factors) = self.0.iter().copied().partition(|(v, _)| v.is_param());
        (Monomial(s), Monomial(p))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().map(|(v, _)| *v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        while i > 0 && j > 0 {
            let (va, ea) = a[i - 1];
            let (vb, eb) = b[j - 1];
            match va.cmp(&vb) {
                Ordering::Greater => return Ordering::Greater,
                Ordering::Less => return Ordering::Less,
                Ordering::Equal => match ea.cmp(&eb) {
                    Ordering::Equal => {
                        i -= 1;
                        j -= 1;
                    }
                    o => return o,
                },
            }
        }
        i.cmp(&j)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_char('*')?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial over ℚ. No stored zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::ONE)
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(v: VarId) -> Self {
        Self::term(Rational::ONE, Monomial::var(v))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in it {
            p.add_term(m, &c);
        }
        p
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

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or(Rational::ZERO)
    }

    /// Leading term under grlex.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::ZERO),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_one())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// `self += c * m * other`.
    pub fn add_scaled(&mut self, other: &Polynomial, c: &Rational, m: &Monomial) {
        if c.is_zero() {
            return;
        }
        for (om, oc) in other.terms.iter() {
            let mm = if m.is_one() { om.clone() } else { om.mul(m) };
            self.add_term(mm, &(oc * c));
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    /// Monic rescaling (leading coefficient 1).
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Polynomial::zero(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to a coordinate or fiber
    /// variable.
    pub fn partial(&self, v: VarId) -> Result<Polynomial> {
        if v.is_param() {
            return Err(Error::ParameterDerivative(v));
        }
        Ok(self.partial_unchecked(v))
    }

    pub(crate) fn partial_unchecked(&self, v: VarId) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let (e, lowered) = m.lower(v);
            if e > 0 {
                out.add_term(lowered, &c.scale(e as i64));
            }
        }
        out
    }

    /// Applies `∂^key`, reading each factor `v^e` of `key` as `∂^e/∂v^e`.
    /// Parameters in `key` are not checked.
    pub(crate) fn partial_multi(&self, key: &Monomial) -> Polynomial {
        if key.is_one() {
            return self.clone();
        }
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let Some(rest) = m.div(key) else { continue };
            let mut f = c.clone();
            for &(v, e) in key.factors() {
                let have = m.exponent(v);
                let mut k = 1i64;
                for j in 0..e {
                    k *= (have - j) as i64;
                }
                f = f.scale(k);
            }
            out.add_term(rest, &f);
        }
        out
    }

    pub fn vars(&self) -> alloc::collections::BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn has_params(&self) -> bool {
        self.terms.keys().any(Monomial::has_params)
    }

    /// Substitutes rational values for some variables.
    pub fn eval(&self, values: &BTreeMap<VarId, Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in m.factors() {
                match values.get(&v) {
                    Some(val) => coeff = &coeff * &val.pow(e),
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial::from_factors(rest), &coeff);
        }
        out
    }

    /// Substitutes polynomials for some variables.
    pub fn substitute(&self, map: &BTreeMap<VarId, Polynomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let mut acc = Polynomial::constant(c.clone());
            let mut rest = Vec::new();
            for &(v, e) in m.factors() {
                match map.get(&v) {
                    Some(p) => acc = &acc * &p.pow(e),
                    None => rest.push((v, e)),
                }
            }
            out = &out + &acc.mul_monomial(&Monomial::from_factors(rest));
        }
        out
    }

    /// Groups terms by their (x, ξ) part, with parameter polynomials as
    /// coefficients.
    pub fn by_symbol_part(&self) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in self.terms.iter() {
            let (s, p) = m.split_params();
            out.entry(s).or_default().add_term(p, c);
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Keeps only the terms of the given fiber degree.
    pub fn xi_homogeneous_part(&self, k: u32) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.xi_degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Splits by fiber degree.
    pub fn xi_grades(&self) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in self.terms.iter() {
            out.entry(m.xi_degree())
                .or_default()
                .terms
                .insert(m.clone(), c.clone());
        }
        out
    }

    pub fn map_coeffs<F: FnMut(&Rational) -> Rational>(&self, mut f: F) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn parse(s: &str) -> Result<Polynomial> {
        Parser::new(s).parse()
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in small.terms.iter() {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in rhs.terms.iter() {
            out.add_term(m.clone(), &-c);
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            for (n, d) in rhs.terms.iter() {
                out.add_term(m.mul(n), &(c * d));
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::ONE)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

macro_rules! owned_poly_op {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_poly_op!(Add, add);
owned_poly_op!(Sub, sub);
owned_poly_op!(Mul, mul);

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl From<VarId> for Polynomial {
    fn from(v: VarId) -> Self {
        Polynomial::var(v)
    }
}

/// Writes one term `c*m` with its sign; `first` suppresses a leading `+`.
pub(crate) fn write_term(
    f: &mut impl fmt::Write,
    c: &Rational,
    body: &str,
    first: bool,
    spaced: bool,
) -> fmt::Result {
    let neg = c.is_negative();
    let mag = c.abs();
    match (first, neg, spaced) {
        (true, true, _) => f.write_char('-')?,
        (true, false, _) => {}
        (false, true, true) => f.write_str(" - ")?,
        (false, false, true) => f.write_str(" + ")?,
        (false, true, false) => f.write_char('-')?,
        (false, false, false) => f.write_char('+')?,
    }
    if body.is_empty() {
        write!(f, "{mag}")
    } else if mag.is_one() {
        f.write_str(body)
    } else {
        write!(f, "{mag}*{body}")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_char('0');
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let body = if m.is_one() {
                String::new()
            } else {
                m.to_string()
            };
            write_term(f, c, &body, k == 0, false)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Polynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Polynomial::parse(s)
    }
}

/// Recursive-descent parser for the canonical syntax.
struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Polynomial> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.integer()?;
            let e = u32::try_from(e).or_else(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse().or_else(|_| self.err("integer overflow"))
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let save = self.pos;
                if self.eat(b'/') && matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                }
                let lit = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let lit: String = lit.chars().filter(|c| !c.is_whitespace()).collect();
                match lit.parse::<Rational>() {
                    Ok(q) => Ok(Polynomial::constant(q)),
                    Err(_) => self.err("invalid number"),
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let v = self.variable()?;
                Ok(Polynomial::var(v))
            }
            _ => self.err("expected term"),
        }
    }

    fn variable(&mut self) -> Result<VarId> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = core::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
        let index: Option<u64> = if digits.is_empty() {
            None
        } else {
            digits.parse().ok()
        };
        let small = |i: Option<u64>| i.filter(|i| (1..=255).contains(i)).map(|i| i as u8);
        match (name, index) {
            ("x", i) => small(i).map(VarId::X).map_or_else(|| self.err("bad coordinate"), Ok),
            ("xi", i) => small(i).map(VarId::Xi).map_or_else(|| self.err("bad fiber"), Ok),
            ("t", Some(i @ 0..=2)) => {
                if self.src.get(self.pos) != Some(&b'[') {
                    return self.err("expected '[' after graded parameter");
                }
                self.pos += 1;
                let k = self.integer()?;
                if !self.eat(b']') {
                    return self.err("expected ']'");
                }
                let k = u16::try_from(k).or_else(|_| self.err("grade too large"))?;
                Ok(VarId::Param(Param {
                    family: Family::t(i as usize),
                    grade: k,
                }))
            }
            ("tau", Some(i @ 0..=2)) => Ok(VarId::tau(i as usize)),
            ("lam", None) => Ok(VarId::lambda()),
            ("mu", None) => Ok(VarId::mu()),
            _ => self.err("unknown variable"),
        }
    }
}
