//! Polynomial ideals in the deformation parameters: reduced Gröbner bases
//! (grlex), normal forms, membership and comparison.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::poly::{Monomial, Polynomial, VarId};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationIdeal {
    generators: Vec<Polynomial>,
    basis: Vec<Polynomial>,
}

impl Default for RelationIdeal {
    fn default() -> Self {
        RelationIdeal::zero()
    }
}

/// Multivariate division remainder of `p` by `basis`.
fn reduce(p: &Polynomial, basis: &[Polynomial]) -> Polynomial {
    let mut rest = p.clone();
    let mut out = Polynomial::zero();
    'outer: while let Some((m, c)) = rest.leading().map(|(m, c)| (m.clone(), c.clone())) {
        for g in basis {
            let (lm, lc) = g.leading().expect("basis elements are nonzero");
            if let Some(q) = m.div(lm) {
                rest.add_scaled(g, &-(&c / lc), &q);
                continue 'outer;
            }
        }
        rest.add_term(m.clone(), &-c.clone());
        out.add_term(m, &c);
    }
    out
}

fn s_poly(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let (lf, cf) = f.leading().unwrap();
    let (lg, cg) = g.leading().unwrap();
    let l = lf.lcm(lg);
    let mut out = f.mul_monomial(&l.div(lf).unwrap()).scale(&cf.recip());
    out.add_scaled(g, &-cg.recip(), &l.div(lg).unwrap());
    out
}

/// Buchberger's algorithm with the coprime and chain criteria, returning
/// the reduced monic basis sorted by ascending leading monomial.
fn groebner(gens: &[Polynomial]) -> Vec<Polynomial> {
    let mut g: Vec<Polynomial> = Vec::new();
    for p in gens {
        let r = reduce(p, &g);
        if !r.is_zero() {
            g.push(r.monic());
        }
    }
    let mut pairs: BTreeSet<(Monomial, usize, usize)> = BTreeSet::new();
    for j in 0..g.len() {
        for i in 0..j {
            let l = g[i].leading().unwrap().0.lcm(g[j].leading().unwrap().0);
            pairs.insert((l, i, j));
        }
    }
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    while let Some((lcm, i, j)) = pairs.pop_first() {
        done.insert((i, j));
        let (li, lj) = (g[i].leading().unwrap().0, g[j].leading().unwrap().0);
        if li.is_coprime(lj) {
            continue;
        }
        // Chain criterion: some k with lm(k) | lcm and both pairs handled.
        let chain = (0..g.len()).any(|k| {
            k != i
                && k != j
                && g[k].leading().unwrap().0.divides(&lcm)
                && done.contains(&(i.min(k), i.max(k)))
                && done.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let r = reduce(&s_poly(&g[i], &g[j]), &g);
        if r.is_zero() {
            continue;
        }
        let r = r.monic();
        let k = g.len();
        for (a, h) in g.iter().enumerate() {
            let l = h.leading().unwrap().0.lcm(r.leading().unwrap().0);
            pairs.insert((l, a, k));
        }
        g.push(r);
    }
    // Minimalize then inter-reduce.
    let mut keep: Vec<Polynomial> = Vec::new();
    for (a, p) in g.iter().enumerate() {
        let lp = p.leading().unwrap().0;
        let redundant = g.iter().enumerate().any(|(b, q)| {
            let lq = q.leading().unwrap().0;
            b != a && lq.divides(lp) && (lq != lp || b < a)
        });
        if !redundant {
            keep.push(p.clone());
        }
    }
    let mut out: Vec<Polynomial> = Vec::with_capacity(keep.len());
    for (a, p) in keep.iter().enumerate() {
        let others: Vec<Polynomial> = keep
            .iter()
            .enumerate()
            .filter(|(b, _)| *b != a)
            .map(|(_, q)| q.clone())
            .collect();
        let (lm, lc) = p.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut tail = p.clone();
        tail.add_term(lm.clone(), &-lc.clone());
        let mut r = reduce(&tail, &others);
        r.add_term(lm, &lc);
        out.push(r.monic());
    }
    out.sort_by(|a, b| a.leading().unwrap().0.cmp(b.leading().unwrap().0));
    out
}

impl RelationIdeal {
    pub fn zero() -> Self {
        RelationIdeal {
            generators: Vec::new(),
            basis: Vec::new(),
        }
    }

    /// `buchberger`: the ideal with its reduced Gröbner basis.
    pub fn new(generators: Vec<Polynomial>) -> Self {
        let generators: Vec<Polynomial> = generators.into_iter().filter(|p| !p.is_zero()).collect();
        let basis = groebner(&generators);
        RelationIdeal { generators, basis }
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Parameter variables occurring in the generators, ascending.
    pub fn variables(&self) -> Vec<VarId> {
        let mut s = BTreeSet::new();
        for g in self.generators.iter() {
            s.extend(g.vars());
        }
        s.into_iter().collect()
    }

    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        reduce(p, &self.basis)
    }

    pub fn contains(&self, p: &Polynomial) -> bool {
        self.normal_form(p).is_zero()
    }

    /// The ideal with extra generators.
    pub fn extended(&self, more: impl IntoIterator<Item = Polynomial>) -> Self {
        let mut g = self.generators.clone();
        g.extend(more);
        RelationIdeal::new(g)
    }

    pub fn is_subset_of(&self, other: &RelationIdeal) -> Option<Polynomial> {
        self.generators.iter().find(|g| !other.contains(g)).cloned()
    }
}

/// Outcome of [`ideal_compare`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealComparison {
    Equal,
    /// `I ⊊ J`; the witness lies in `J` but not in `I`.
    StrictlyContained { witness: Polynomial },
    /// `J ⊊ I`; the witness lies in `I` but not in `J`.
    StrictlyContains { witness: Polynomial },
    Incomparable {
        only_in_first: Polynomial,
        only_in_second: Polynomial,
    },
}

impl IdealComparison {
    pub fn name(&self) -> &'static str {
        match self {
            IdealComparison::Equal => "equal",
            IdealComparison::StrictlyContained { .. } => "first_strictly_contained",
            IdealComparison::StrictlyContains { .. } => "first_strictly_contains",
            IdealComparison::Incomparable { .. } => "incomparable",
        }
    }
}

pub fn ideal_compare(i: &RelationIdeal, j: &RelationIdeal) -> IdealComparison {
    match (i.is_subset_of(j), j.is_subset_of(i)) {
        (None, None) => IdealComparison::Equal,
        (None, Some(w)) => IdealComparison::StrictlyContained { witness: w },
        (Some(w), None) => IdealComparison::StrictlyContains { witness: w },
        (Some(a), Some(b)) => IdealComparison::Incomparable {
            only_in_first: a,
            only_in_second: b,
        },
    }
}

/// Named relation families with their natural lower grade bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationFamily {
    /// `t1[k] t2[k−1] − t1[k−2] t2[k]`, `k ≥ 4`.
    Quadratic,
    /// `(t0[k] − t0[k−1]) t1[k] t2[k−1]`, `k ≥ 3`.
    CubicOne,
    /// `(t0[k] − t0[k−2]) t2[k] t2[k−2]`, `k ≥ 4`.
    CubicTwo,
    /// `(t0[k] − t0[k−1]) t1[k]`, `k ≥ 3`.
    DensityOne,
    /// `(t0[k] − t0[k−2]) t2[k]`, `k ≥ 4`.
    DensityTwo,
}

fn t(i: usize, k: usize) -> Polynomial {
    Polynomial::var(VarId::t(i, k))
}

impl RelationFamily {
    pub fn min_grade(self) -> usize {
        match self {
            RelationFamily::Quadratic | RelationFamily::CubicTwo | RelationFamily::DensityTwo => 4,
            RelationFamily::CubicOne | RelationFamily::DensityOne => 3,
        }
    }

    pub fn instance(self, k: usize) -> Polynomial {
        match self {
            RelationFamily::Quadratic => &(&t(1, k) * &t(2, k - 1)) - &(&t(1, k - 2) * &t(2, k)),
            RelationFamily::CubicOne => &(&(&t(0, k) - &t(0, k - 1)) * &t(1, k)) * &t(2, k - 1),
            RelationFamily::CubicTwo => &(&(&t(0, k) - &t(0, k - 2)) * &t(2, k)) * &t(2, k - 2),
            RelationFamily::DensityOne => &(&t(0, k) - &t(0, k - 1)) * &t(1, k),
            RelationFamily::DensityTwo => &(&t(0, k) - &t(0, k - 2)) * &t(2, k),
        }
    }

    /// Instances for `min_grade ≤ k ≤ window`.
    pub fn instances(self, window: usize) -> Vec<Polynomial> {
        (self.min_grade()..=window).map(|k| self.instance(k)).collect()
    }
}

/// Generators of the integrability ideal (quadratic and both cubic series).
pub fn integrability_generators(window: usize) -> Vec<Polynomial> {
    [RelationFamily::Quadratic, RelationFamily::CubicOne, RelationFamily::CubicTwo]
        .into_iter()
        .flat_map(|f| f.instances(window))
        .collect()
}

/// Generators of the ideal realized by the density modules.
pub fn density_generators(window: usize) -> Vec<Polynomial> {
    [RelationFamily::Quadratic, RelationFamily::DensityOne, RelationFamily::DensityTwo]
        .into_iter()
        .flat_map(|f| f.instances(window))
        .collect()
}

/// Evaluates `p` at a point given on its variables.
pub fn evaluate(p: &Polynomial, at: &BTreeMap<VarId, Rational>) -> Option<Rational> {
    p.eval(at).as_constant()
}
