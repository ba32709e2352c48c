//! Formal deformations of the symbol module: the infinitesimal deformation
//! with grade-wise parameters, order-by-order Maurer–Cartan solving,
//! grading substitution and conjugation by inner automorphisms.
//!
//! A deformation is `ρ(t)(X) = L_X + Σ_m φ_m(t)(X)` where `φ_m` has
//! parameter degree `m`. Each `φ_m` is a graded cochain: a list of
//! parameter-weighted atoms, each knowing how it acts on one grade `𝒮_g`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::ansatz::{enumerate_schemes, SchemeCombination, SchemeDescriptor};
use crate::error::{Error, Result};
use crate::ideal::{ideal_compare, IdealComparison, RelationFamily, RelationIdeal};
use crate::linsolve::{Eliminator, RelationSpan};
use crate::operator::EndOp;
use crate::poly::{Monomial, Polynomial, VarId};
use crate::rational::Rational;
use crate::symbol::{exponent_vectors, monomial_fields, xxi_monomial, VectorField};

/// Lowest grade whose relations are free of window truncation: below it
/// some parameter a relation family would reference does not exist.
pub const INTERIOR_MIN_GRADE: usize = 4;

/// Dimension, grade window `[0, K]` and enabled parameter families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub dim: usize,
    pub window: usize,
    pub families: [bool; 3],
}

impl Config {
    pub fn new(dim: usize, window: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if window < 2 {
            return Err(Error::InvalidConfig("grade window must be at least 2".into()));
        }
        Ok(Config {
            dim,
            window,
            families: [true; 3],
        })
    }

    pub fn with_families(mut self, families: [bool; 3]) -> Self {
        self.families = families;
        self
    }

    /// Whether `t_i^k` is a parameter of the infinitesimal deformation.
    pub fn has_param(&self, i: usize, k: i64) -> bool {
        i < 3 && self.families[i] && k >= if i == 0 { 0 } else { 2 } && k <= self.window as i64
    }

    pub fn params(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = (0..3)
            .flat_map(|i| (0..=self.window).map(move |k| (i, k)))
            .filter(|&(i, k)| self.has_param(i, k as i64))
            .map(|(i, k)| VarId::t(i, k))
            .collect();
        v.sort();
        v
    }
}

/// Building block of a graded cochain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GradedAtom {
    /// `X ↦ L_X` on every grade.
    Lie,
    /// The scheme operator, acting on `𝒮_grade` only.
    Scheme {
        grade: usize,
        desc: SchemeDescriptor,
    },
    /// `X ↦ [op, inner(X)]`.
    Ad { op: EndOp, inner: Box<GradedAtom> },
}

impl GradedAtom {
    /// An operator agreeing with the atom on `𝒮_g`.
    pub fn op_at(&self, x: &VectorField, g: usize, window: usize) -> EndOp {
        match self {
            GradedAtom::Lie => EndOp::lie(x),
            GradedAtom::Scheme { grade, desc } => {
                if *grade == g {
                    desc.operator(x)
                } else {
                    EndOp::zero()
                }
            }
            GradedAtom::Ad { op, inner } => {
                let mut out = op.compose(&inner.op_at(x, g, window));
                for (s, piece) in op.shift_decompose() {
                    let h = g as i64 - s;
                    if h < 0 || h > window as i64 {
                        continue;
                    }
                    out = &out - &inner.op_at(x, h as usize, window).compose(&piece);
                }
                out
            }
        }
    }
}

/// A finite sum `Σ c_j · atom_j` with parameter polynomial weights.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedCochain {
    terms: Vec<(Polynomial, GradedAtom)>,
}

impl GradedCochain {
    pub fn zero() -> Self {
        GradedCochain { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(Polynomial, GradedAtom)] {
        &self.terms
    }

    pub fn push(&mut self, c: Polynomial, atom: GradedAtom) {
        if !c.is_zero() {
            self.terms.push((c, atom));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn op_at(&self, x: &VectorField, g: usize, window: usize) -> EndOp {
        let mut out = EndOp::zero();
        for (c, a) in self.terms.iter() {
            out.add_scaled(&a.op_at(x, g, window), c);
        }
        out
    }

    /// Coefficients of the scheme atoms, keyed by `(grade, descriptor)`.
    pub fn scheme_coefficients(&self) -> BTreeMap<(usize, SchemeDescriptor), Polynomial> {
        let mut out: BTreeMap<(usize, SchemeDescriptor), Polynomial> = BTreeMap::new();
        for (c, a) in self.terms.iter() {
            if let GradedAtom::Scheme { grade, desc } = a {
                let e = out.entry((*grade, *desc)).or_default();
                *e = &*e + c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Substitutes values for parameters in every weight.
    pub fn substitute(&self, values: &BTreeMap<VarId, Polynomial>) -> GradedCochain {
        let mut out = GradedCochain::zero();
        for (c, a) in self.terms.iter() {
            out.push(c.substitute(values), a.clone());
        }
        out
    }
}

/// Solved orders `φ_1..φ_m` with their accumulated relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationState {
    config: Config,
    phi: Vec<GradedCochain>,
    ideal: RelationIdeal,
}

impl DeformationState {
    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// `φ_j` for `1 ≤ j ≤ order`.
    pub fn phi(&self, j: usize) -> &GradedCochain {
        &self.phi[j - 1]
    }

    pub fn ideal(&self) -> &RelationIdeal {
        &self.ideal
    }

    /// Replaces parameters by values in every order; the ideal is kept.
    pub fn substitute(&self, values: &BTreeMap<VarId, Polynomial>) -> DeformationState {
        DeformationState {
            config: self.config.clone(),
            phi: self.phi.iter().map(|p| p.substitute(values)).collect(),
            ideal: self.ideal.clone(),
        }
    }
}

/// `infinitesimal`: `φ_1 = Σ_k t0[k] c_0 + Σ_{k≥2} (t1[k] c_1 + t2[k] c_2)`,
/// each term restricted to `𝒮_k`.
pub fn infinitesimal(config: &Config) -> Result<DeformationState> {
    let config = Config::new(config.dim, config.window)?.with_families(config.families);
    let mut phi = GradedCochain::zero();
    for k in 0..=config.window {
        for i in 0..3 {
            if !config.has_param(i, k as i64) {
                continue;
            }
            let t = Polynomial::var(VarId::t(i, k));
            for (desc, c) in SchemeCombination::standard(i).terms() {
                phi.push(&t * c, GradedAtom::Scheme { grade: k, desc: *desc });
            }
        }
    }
    Ok(DeformationState {
        config,
        phi: vec![phi],
        ideal: RelationIdeal::zero(),
    })
}

fn field_key(f: &VectorField) -> Monomial {
    f.value().leading().map(|(m, _)| m.clone()).unwrap_or_default()
}

/// Applies solved orders to symbols, caching the operator of each order
/// on each monomial field and grade.
struct Evaluator<'a> {
    state: &'a DeformationState,
    cache: BTreeMap<(Monomial, usize, usize), EndOp>,
}

impl<'a> Evaluator<'a> {
    fn new(state: &'a DeformationState) -> Self {
        Evaluator {
            state,
            cache: BTreeMap::new(),
        }
    }

    /// `φ_j(X)` applied to a grade-homogeneous `p ∈ 𝒮_g`.
    fn apply_at(&mut self, j: usize, x: &VectorField, g: usize, p: &Polynomial) -> Polynomial {
        let state = self.state;
        let window = state.config.window;
        let mut out = Polynomial::zero();
        if g > window {
            return out;
        }
        for (c, f) in x.monomial_terms() {
            let op = self
                .cache
                .entry((field_key(&f), j, g))
                .or_insert_with(|| state.phi(j).op_at(&f, g, window));
            out.add_scaled(&op.apply(p), &c, &Monomial::one());
        }
        out
    }

    /// `φ_j(X)` applied to a symbol of mixed grade.
    fn apply(&mut self, j: usize, x: &VectorField, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (g, part) in p.xi_grades() {
            out = &out + &self.apply_at(j, x, g as usize, &part);
        }
        out
    }

    /// `R_m(X,Y)P = Σ_{i+j=m} [φ_i(X), φ_j(Y)] P`.
    fn obstruction(&mut self, m: usize, x: &VectorField, y: &VectorField, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for i in 1..m {
            let j = m - i;
            let yp = self.apply(j, y, p);
            out = &out + &self.apply(i, x, &yp);
            let xp = self.apply(i, x, p);
            out = &out - &self.apply(j, y, &xp);
        }
        out
    }

    /// `δφ_j(X,Y)P = φ_j([X,Y])P − [L_X, φ_j(Y)]P + [L_Y, φ_j(X)]P`.
    fn coboundary(&mut self, j: usize, x: &VectorField, y: &VectorField, p: &Polynomial) -> Polynomial {
        let (lx, ly) = (EndOp::lie(x), EndOp::lie(y));
        let xy = x.bracket(y).expect("fields share a dimension");
        let mut out = self.apply(j, &xy, p);
        let yp = self.apply(j, y, p);
        out = &out - &lx.apply(&yp);
        out = &out + &self.apply(j, y, &lx.apply(p));
        let xp = self.apply(j, x, p);
        out = &out + &ly.apply(&xp);
        out = &out - &self.apply(j, x, &ly.apply(p));
        out
    }
}

/// `mc_residual`: `½ Σ_{i+j=m} ⟦φ_i, φ_j⟧` evaluated at `(X, Y)` on `P`.
/// The order-`m` equation is `δφ_m + mc_residual = 0`.
pub fn mc_residual(
    state: &DeformationState,
    m: usize,
    x: &VectorField,
    y: &VectorField,
    p: &Polynomial,
) -> Result<Polynomial> {
    if m < 2 || m > state.order() + 1 {
        return Err(Error::InvalidConfig(alloc::format!(
            "residual of order {m} needs orders 1..{} solved",
            m - 1
        )));
    }
    Ok(-&Evaluator::new(state).obstruction(m, x, y, p))
}

/// Residual-zero certificate of one grade.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub tests_run: usize,
    pub all_zero: bool,
}

/// Result of solving one order on one grade.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub order: usize,
    pub grade: usize,
    /// New compatibility relations, in normal form modulo the ideal of the
    /// lower orders.
    pub relations: Vec<Polynomial>,
    /// Set when some parameter of the generic relation pattern at this grade
    /// does not exist; such relations are kept out of ideal verdicts.
    pub window_truncated: bool,
    pub coefficients: BTreeMap<SchemeDescriptor, Polynomial>,
    pub certificate: Certificate,
}

/// A monomial symbol paired with a field pair.
struct TestPoint {
    /// Expected shift of the x-free part, `|α|+|α'|+|γ| − 2`.
    shift: i64,
    grade: usize,
    p: Polynomial,
}

/// Monomial fields of degree `≤ max_deg` with their degrees.
fn fields_upto(dim: usize, max_deg: u32) -> Vec<(u32, VectorField)> {
    (0..=max_deg)
        .flat_map(|a| monomial_fields(dim, a).into_iter().map(move |f| (a, f)))
        .collect()
}

/// Smallest total x-degree of a test triple reaching every shift `≤ 2m`.
pub fn slice_degree(m: usize) -> u32 {
    2 * m as u32 + 2
}

/// Unordered field pairs of total degree `≤ top`.
fn test_pairs(fields: &[(u32, VectorField)], top: u32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            if fields[i].0 + fields[j].0 <= top {
                out.push((i, j));
            }
        }
    }
    out
}

/// Test triples on one pair: symbols completing the total x-degree to at
/// most `top`, every grade of the window. Operators here are homogeneous,
/// so `top = slice_degree(m)` sees every shift the order-`m` ansatz can
/// produce.
fn pair_points(fields: &[(u32, VectorField)], pair: (usize, usize), dim: usize, window: usize, top: u32) -> Vec<TestPoint> {
    let ab = fields[pair.0].0 + fields[pair.1].0;
    let mut out = Vec::new();
    for c in 0..=top - ab {
        for gamma in exponent_vectors(dim, c) {
            for k in 0..=window {
                for beta in exponent_vectors(dim, k as u32) {
                    out.push(TestPoint {
                        shift: (ab + c) as i64 - 2,
                        grade: k,
                        p: Polynomial::term(Rational::ONE, xxi_monomial(&gamma, &beta)),
                    });
                }
            }
        }
    }
    out
}

/// `δ(desc)(X, Y)` as an operator.
fn scheme_coboundary(desc: &SchemeDescriptor, x: &VectorField, y: &VectorField) -> EndOp {
    let xy = x.bracket(y).expect("fields share a dimension");
    let (lx, ly) = (EndOp::lie(x), EndOp::lie(y));
    let mut out = desc.operator(&xy);
    out = &out - &lx.commutator(&desc.operator(y));
    &out + &ly.commutator(&desc.operator(x))
}

/// x-free part of a symbol, keyed by ξ-monomial.
fn x_free_part(p: &Polynomial) -> BTreeMap<Monomial, Polynomial> {
    let mut out = p.by_symbol_part();
    out.retain(|m, _| m.x_degree() == 0);
    out
}

fn is_truncated(grade: usize) -> bool {
    grade < INTERIOR_MIN_GRADE
}

/// `solve_order`: solves `δφ_m = R_m` in the invariant ansatz, grade by grade
/// and shift by shift, and appends the compatibility relations to the ideal.
pub fn solve_order(state: &DeformationState, m: usize) -> Result<(DeformationState, Vec<ObstructionReport>)> {
    if m < 2 || state.order() + 1 != m {
        return Err(Error::InvalidConfig(alloc::format!(
            "order {m} cannot follow order {}",
            state.order()
        )));
    }
    let cfg = &state.config;
    let (dim, window) = (cfg.dim, cfg.window);
    let max_shift = 2 * m as i64;
    let top = slice_degree(m);
    let fields = fields_upto(dim, top);
    let pairs = test_pairs(&fields, top);

    let columns: Vec<Vec<SchemeDescriptor>> = (0..=max_shift)
        .map(|d| enumerate_schemes(m as u32, d))
        .collect::<Result<_>>()?;
    let mut systems: BTreeMap<(usize, i64), Eliminator> = BTreeMap::new();
    for d in 0..=max_shift {
        for k in d as usize..=window {
            systems.insert((k, d), Eliminator::new(columns[d as usize].len()));
        }
    }

    let mut eval = Evaluator::new(state);
    for &pair in pairs.iter() {
        let (x, y) = (&fields[pair.0].1, &fields[pair.1].1);
        let mut col_ops: BTreeMap<i64, Vec<EndOp>> = BTreeMap::new();
        for tp in pair_points(&fields, pair, dim, window, top) {
            let d = tp.shift;
            if d < 0 || d > max_shift || (tp.grade as i64) < d {
                continue;
            }
            let ops = col_ops
                .entry(d)
                .or_insert_with(|| columns[d as usize].iter().map(|c| scheme_coboundary(c, x, y)).collect());
            let outs: Vec<BTreeMap<Monomial, Polynomial>> =
                ops.iter().map(|op| x_free_part(&op.apply(&tp.p))).collect();
            let rhs = x_free_part(&eval.obstruction(m, x, y, &tp.p));
            let mut slots: Vec<&Monomial> = rhs.keys().chain(outs.iter().flat_map(|o| o.keys())).collect();
            slots.sort();
            slots.dedup();
            let sys = systems.get_mut(&(tp.grade, d)).expect("system exists");
            for s in slots {
                let row: Vec<Rational> = outs
                    .iter()
                    .map(|o| o.get(s).and_then(|c| c.as_constant()).unwrap_or(Rational::ZERO))
                    .collect();
                sys.push_row(row, rhs.get(s).cloned().unwrap_or_default());
            }
        }
    }

    // Relations per grade, reduced modulo the lower orders.
    let mut per_grade: BTreeMap<usize, (RelationSpan, Vec<(SchemeDescriptor, Polynomial)>)> = BTreeMap::new();
    for ((k, d), sys) in systems {
        let sol = sys.finish();
        let entry = per_grade.entry(k).or_insert_with(|| (RelationSpan::new(), Vec::new()));
        for r in sol.relations {
            let nf = state.ideal.normal_form(&r);
            if nf.is_zero() {
                continue;
            }
            if !nf.has_params() {
                return Err(Error::AnsatzInsufficient {
                    order: m,
                    grade: k,
                    shift: d as usize,
                    witness: alloc::format!("{r}"),
                });
            }
            entry.0.insert(nf);
        }
        for (desc, c) in columns[d as usize].iter().zip(sol.particular) {
            entry.1.push((*desc, c));
        }
    }
    let mut relations: BTreeMap<usize, Vec<Polynomial>> = BTreeMap::new();
    let mut all_new = Vec::new();
    for (k, (span, _)) in per_grade.iter_mut() {
        let rels: Vec<Polynomial> = core::mem::take(span).into_basis().into_iter().map(|r| r.monic()).collect();
        all_new.extend(rels.iter().cloned());
        relations.insert(*k, rels);
    }
    let ideal = state.ideal.extended(all_new);

    let mut phi = GradedCochain::zero();
    let mut coefficients: BTreeMap<usize, BTreeMap<SchemeDescriptor, Polynomial>> = BTreeMap::new();
    for (k, (_, coeffs)) in per_grade.iter() {
        let map = coefficients.entry(*k).or_default();
        for (desc, c) in coeffs {
            let c = ideal.normal_form(c);
            if c.is_zero() {
                continue;
            }
            phi.push(c.clone(), GradedAtom::Scheme { grade: *k, desc: *desc });
            map.insert(*desc, c);
        }
    }
    let mut next = state.clone();
    next.phi.push(phi);
    next.ideal = ideal;

    let certs = certify(&next, m, &fields, top);
    let reports = (0..=window)
        .map(|k| ObstructionReport {
            order: m,
            grade: k,
            relations: relations.remove(&k).unwrap_or_default(),
            window_truncated: is_truncated(k),
            coefficients: coefficients.remove(&k).unwrap_or_default(),
            certificate: certs[k].clone(),
        })
        .collect();
    Ok((next, reports))
}

/// Checks `R_m − δφ_m ≡ 0` modulo the ideal on every test point, per grade.
fn certify(state: &DeformationState, m: usize, fields: &[(u32, VectorField)], top: u32) -> Vec<Certificate> {
    let (dim, window) = (state.config.dim, state.config.window);
    let mut out = vec![
        Certificate {
            tests_run: 0,
            all_zero: true,
        };
        window + 1
    ];
    let mut eval = Evaluator::new(state);
    for pair in test_pairs(fields, top) {
        let (x, y) = (&fields[pair.0].1, &fields[pair.1].1);
        for tp in pair_points(fields, pair, dim, window, top) {
            let r = &eval.obstruction(m, x, y, &tp.p) - &eval.coboundary(m, x, y, &tp.p);
            let ok = r.by_symbol_part().values().all(|c| state.ideal.contains(c));
            let cert = &mut out[tp.grade];
            cert.tests_run += 1;
            cert.all_zero &= ok;
        }
    }
    out
}

/// Re-checks the order-`m` equation of a state modulo its ideal on the
/// standard test slice.
pub fn verify_order(state: &DeformationState, m: usize) -> Result<Vec<Certificate>> {
    verify_order_on(state, m, slice_degree(m))
}

/// Like [`verify_order`] on all triples of total x-degree `≤ top`.
pub fn verify_order_on(state: &DeformationState, m: usize, top: u32) -> Result<Vec<Certificate>> {
    if m < 2 || m > state.order() {
        return Err(Error::InvalidConfig(alloc::format!("order {m} is not solved")));
    }
    let fields = fields_upto(state.config.dim, top);
    Ok(certify(state, m, &fields, top))
}

/// `grading_substitute` for one ordered word `τ_{i_1}⋯τ_{i_r}` at grade `k`:
/// `t_{i_1}^{k−i_2−⋯−i_r} ⋯ t_{i_r}^k`.
pub fn grading_substitute_word(word: &[usize], k: usize, config: &Config) -> Result<Polynomial> {
    let mut out = Polynomial::one();
    let mut grade = k as i64;
    for &i in word.iter().rev() {
        if grade < 0 || grade > config.window as i64 {
            return Err(Error::GradeOutOfWindow {
                grade,
                max: config.window,
            });
        }
        if !config.has_param(i, grade) {
            return Err(Error::NoSuchParameter { family: i, grade });
        }
        out = &out * &Polynomial::var(VarId::t(i, grade as usize));
        grade -= i as i64;
    }
    Ok(out)
}

/// `grading_substitute` on a commutative polynomial in `τ_0, τ_1, τ_2`,
/// reading each monomial as the word with ascending indices.
pub fn grading_substitute(expr: &Polynomial, k: usize, config: &Config) -> Result<Polynomial> {
    let mut out = Polynomial::zero();
    for (m, c) in expr.terms() {
        let mut word = Vec::new();
        for &(v, e) in m.factors() {
            let i = match v {
                VarId::Param(p) => p.family.tau_index(),
                _ => None,
            }
            .ok_or(Error::UnexpectedParameter(v))?;
            word.extend(core::iter::repeat(i).take(e as usize));
        }
        out.add_scaled(&grading_substitute_word(&word, k, config)?, c, &Monomial::one());
    }
    Ok(out)
}

/// A consistency relation `(3.6)`-type from two orderings of a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionRelation {
    pub grade: usize,
    pub word: Vec<usize>,
    pub relation: Polynomial,
    pub window_truncated: bool,
}

/// Consistency relations of the grading substitution: for each mixed
/// quadratic word and grade, the difference of its two orderings.
/// Grades where some ordering of some word cannot be substituted are
/// flagged as truncated.
pub fn substitution_relations(config: &Config) -> Vec<SubstitutionRelation> {
    let mut out = Vec::new();
    for k in 0..=config.window {
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let (Ok(a), Ok(b)) = (
                grading_substitute_word(&[i, j], k, config),
                grading_substitute_word(&[j, i], k, config),
            ) else {
                continue;
            };
            let rel = &a - &b;
            if !rel.is_zero() {
                out.push(SubstitutionRelation {
                    grade: k,
                    word: vec![i, j],
                    relation: rel,
                    window_truncated: is_truncated(k),
                });
            }
        }
    }
    out
}

/// `conjugate_deformation`: applies `exp(−ad T)`, `T = Σ c_a A_a`, to
/// `L + Σ φ_j` and regroups by parameter degree up to the current order.
/// At first order this adds `c_a · δA_a` to `φ_1`.
pub fn conjugate_deformation(state: &DeformationState, generators: &[(Polynomial, EndOp)]) -> DeformationState {
    let top = state.order();
    let mut phi = vec![GradedCochain::zero(); top];
    // Sources: L at degree 0 and φ_j at degree j.
    let mut frontier: Vec<(usize, Polynomial, GradedAtom)> = vec![(0, Polynomial::one(), GradedAtom::Lie)];
    for j in 1..=top {
        for (c, a) in state.phi(j).terms() {
            frontier.push((j, c.clone(), a.clone()));
            phi[j - 1].push(c.clone(), a.clone());
        }
    }
    let degs: Vec<u32> = generators
        .iter()
        .map(|(c, _)| c.total_degree().unwrap_or(0).max(1))
        .collect();
    let mut r = 1i64;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (deg, c, atom) in frontier.iter() {
            for ((g, op), dg) in generators.iter().zip(degs.iter()) {
                let nd = deg + *dg as usize;
                if nd > top {
                    continue;
                }
                // (−1)^r/r! accumulates one factor −1/r per level.
                let w = (c * g).scale(&Rational::new(-1, r));
                let atom = GradedAtom::Ad {
                    op: op.clone(),
                    inner: Box::new(atom.clone()),
                };
                phi[nd - 1].push(w.clone(), atom.clone());
                next.push((nd, w, atom));
            }
        }
        frontier = next;
        r += 1;
    }
    DeformationState {
        config: state.config.clone(),
        phi,
        ideal: state.ideal.clone(),
    }
}

/// Comparison of interior relations with the reference ideals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineSummary {
    pub state: DeformationState,
    pub reports: Vec<ObstructionReport>,
    /// Ideal of all relations at interior grades.
    pub interior: RelationIdeal,
    /// Reference ideal of the integrability conditions at this order.
    pub integrability: RelationIdeal,
    pub vs_integrability: IdealComparison,
    /// Reference ideal realized by the density modules.
    pub density: RelationIdeal,
    pub vs_density: IdealComparison,
}

/// Instances of the given families for `INTERIOR_MIN_GRADE ≤ k ≤ window`.
pub fn interior_instances(families: &[RelationFamily], config: &Config) -> Vec<Polynomial> {
    let lo = families
        .iter()
        .map(|f| f.min_grade())
        .max()
        .unwrap_or(0)
        .max(INTERIOR_MIN_GRADE);
    let relevant = |p: &Polynomial| {
        p.vars().iter().all(|v| match v {
            VarId::Param(q) => q
                .family
                .t_index()
                .map(|i| config.has_param(i, q.grade as i64))
                .unwrap_or(false),
            _ => false,
        })
    };
    families
        .iter()
        .flat_map(|f| (lo..=config.window).map(move |k| f.instance(k)))
        .map(|p| {
            // Disabled families are identically zero.
            let zero: BTreeMap<VarId, Polynomial> = p
                .vars()
                .into_iter()
                .filter(|v| !relevant(&Polynomial::var(*v)))
                .map(|v| (v, Polynomial::zero()))
                .collect();
            p.substitute(&zero)
        })
        .filter(|p| !p.is_zero())
        .collect()
}

/// `run_pipeline`: solves orders `2..=max_order` and compares the interior
/// relations with the reference ideals.
pub fn run_pipeline(config: &Config, max_order: usize) -> Result<PipelineSummary> {
    if max_order < 2 {
        return Err(Error::InvalidConfig("max order must be at least 2".into()));
    }
    let mut state = infinitesimal(config)?;
    let mut reports = Vec::new();
    for m in 2..=max_order {
        let (next, r) = solve_order(&state, m)?;
        state = next;
        reports.extend(r);
    }
    let interior = RelationIdeal::new(
        reports
            .iter()
            .filter(|r| !r.window_truncated)
            .flat_map(|r| r.relations.iter().cloned())
            .collect(),
    );
    let reference: &[RelationFamily] = if max_order == 2 {
        &[RelationFamily::Quadratic]
    } else {
        &[RelationFamily::Quadratic, RelationFamily::CubicOne, RelationFamily::CubicTwo]
    };
    let integrability = RelationIdeal::new(interior_instances(reference, &state.config));
    let density = RelationIdeal::new(interior_instances(
        &[RelationFamily::Quadratic, RelationFamily::DensityOne, RelationFamily::DensityTwo],
        &state.config,
    ));
    Ok(PipelineSummary {
        vs_integrability: ideal_compare(&interior, &integrability),
        vs_density: ideal_compare(&interior, &density),
        state,
        reports,
        interior,
        integrability,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::test_fields;
    use crate::symbol::monomial_symbols;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    fn t(i: usize, k: usize) -> Polynomial {
        Polynomial::var(VarId::t(i, k))
    }

    fn zero_all(cfg: &Config) -> BTreeMap<VarId, Polynomial> {
        cfg.params().into_iter().map(|v| (v, Polynomial::zero())).collect()
    }

    #[test]
    fn infinitesimal_parameters() {
        let cfg = Config::new(2, 2).unwrap();
        let names: Vec<alloc::string::String> = cfg.params().iter().map(|v| alloc::format!("{v}")).collect();
        assert_eq!(names, ["t0[0]", "t0[1]", "t0[2]", "t1[2]", "t2[2]"]);
        assert!(Config::new(2, 1).is_err());
        assert!(infinitesimal(&Config { dim: 2, window: 1, families: [true; 3] }).is_err());
        let s = infinitesimal(&Config::new(2, 4).unwrap()).unwrap();
        assert!(s.phi(1).substitute(&zero_all(s.config())).is_zero());
    }

    #[test]
    fn first_order_shifts() {
        let s = infinitesimal(&Config::new(2, 4).unwrap()).unwrap();
        let mut by_grade: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
        for (_, a) in s.phi(1).terms() {
            if let GradedAtom::Scheme { grade, desc } = a {
                by_grade.entry(*grade).or_default().push(desc.shift());
            }
        }
        for (k, mut shifts) in by_grade {
            shifts.sort();
            shifts.dedup();
            let want: &[i64] = if k >= 2 { &[0, 1, 2] } else { &[0] };
            assert_eq!(shifts, want, "grade {k}");
        }
    }

    #[test]
    fn residual_of_zero_deformation() {
        let s = infinitesimal(&Config::new(2, 4).unwrap()).unwrap();
        let z = s.substitute(&zero_all(s.config()));
        let x = VectorField::parse("x1^2*xi1", 2).unwrap();
        let y = VectorField::parse("x1*x2*xi2", 2).unwrap();
        assert!(mc_residual(&z, 2, &x, &y, &p("x1*xi1^2*xi2")).unwrap().is_zero());
        assert!(mc_residual(&s, 3, &x, &y, &p("xi1")).is_err());
    }

    #[test]
    fn residual_keeps_graded_cross_terms() {
        // With t2 off, the t0 t1 part does not cancel between grades.
        let cfg = Config::new(2, 4).unwrap().with_families([true, true, false]);
        let s = infinitesimal(&cfg).unwrap();
        let x = VectorField::parse("x1*xi1", 2).unwrap();
        let y = VectorField::parse("x1^2*xi1", 2).unwrap();
        let r = mc_residual(&s, 2, &x, &y, &p("xi1^2")).unwrap();
        assert!(!r.is_zero());
        for (m, _) in r.terms() {
            assert!(m.vars().any(|v| v == VarId::t(0, 1) || v == VarId::t(0, 2)), "{r}");
        }
        let uniform: BTreeMap<VarId, Polynomial> = cfg
            .params()
            .into_iter()
            .map(|v| match v {
                VarId::Param(q) => (v, Polynomial::var(VarId::tau(q.family.t_index().unwrap()))),
                _ => unreachable!(),
            })
            .collect();
        // Equal parameters across grades recover the vanishing ungraded cup.
        let r = mc_residual(&s.substitute(&uniform), 2, &x, &y, &p("xi1^2")).unwrap();
        assert!(r.is_zero(), "{r}");
    }

    #[test]
    fn order_two_relations_and_coefficients() {
        let cfg = Config::new(2, 5).unwrap();
        let (next, reports) = solve_order(&infinitesimal(&cfg).unwrap(), 2).unwrap();
        assert_eq!(next.order(), 2);
        let r5 = &reports[5];
        assert!(!r5.window_truncated && reports[3].window_truncated);
        let rels: Vec<Polynomial> = r5.relations.clone();
        let expect = [
            RelationFamily::Quadratic.instance(5),
            RelationFamily::DensityOne.instance(5),
            RelationFamily::DensityTwo.instance(5),
        ];
        assert_eq!(rels.len(), 3);
        let span = RelationIdeal::new(rels);
        for e in expect.iter() {
            assert!(span.contains(e), "{e}");
        }
        let c = &r5.coefficients;
        let get = |d: SchemeDescriptor| c.get(&d).cloned().unwrap_or_default();
        assert_eq!(get(SchemeDescriptor::a(3, 0)), (&t(1, 4) * &t(1, 5)).scale(&Rational::new(-2, 3)));
        assert_eq!(get(SchemeDescriptor::a(4, 0)), -&(&t(2, 4) * &t(1, 5)));
        assert_eq!(get(SchemeDescriptor::c(4, 0)), (&t(2, 4) * &t(1, 5)).scale(&Rational::from(2)));
        assert_eq!(get(SchemeDescriptor::a(5, 0)), (&t(2, 3) * &t(2, 5)).scale(&Rational::new(-3, 10)));
        assert_eq!(get(SchemeDescriptor::c(5, 0)), (&t(2, 3) * &t(2, 5)).scale(&Rational::new(3, 2)));
        assert_eq!(get(SchemeDescriptor::b(3, 0)), (&t(0, 3) * &t(2, 5)).scale(&Rational::from(-3)));
        assert_eq!(c.len(), 6);
        assert!(reports.iter().all(|r| r.certificate.all_zero && r.certificate.tests_run > 0));
    }

    #[test]
    fn order_two_without_t0_t2_is_unobstructed() {
        let cfg = Config::new(2, 5).unwrap().with_families([false, true, false]);
        let (_, reports) = solve_order(&infinitesimal(&cfg).unwrap(), 2).unwrap();
        assert!(reports.iter().all(|r| r.relations.is_empty()));
    }

    #[test]
    fn order_must_follow() {
        let s = infinitesimal(&Config::new(2, 3).unwrap()).unwrap();
        assert!(solve_order(&s, 3).is_err());
        assert!(solve_order(&s, 1).is_err());
    }

    #[test]
    fn substitution_words() {
        let cfg = Config::new(2, 8).unwrap();
        assert_eq!(grading_substitute_word(&[1], 5, &cfg).unwrap(), t(1, 5));
        assert_eq!(grading_substitute_word(&[1, 2], 6, &cfg).unwrap(), &t(1, 4) * &t(2, 6));
        assert_eq!(grading_substitute_word(&[2, 1], 6, &cfg).unwrap(), &t(2, 5) * &t(1, 6));
        assert_eq!(
            grading_substitute_word(&[0, 1, 2], 6, &cfg).unwrap(),
            &(&t(0, 3) * &t(1, 4)) * &t(2, 6)
        );
        assert!(matches!(
            grading_substitute_word(&[1], 9, &cfg),
            Err(Error::GradeOutOfWindow { grade: 9, .. })
        ));
        assert!(matches!(
            grading_substitute_word(&[1, 2], 3, &cfg),
            Err(Error::NoSuchParameter { family: 1, grade: 1 })
        ));
        let expr = p("2*tau1*tau2 + tau0");
        assert_eq!(
            grading_substitute(&expr, 6, &cfg).unwrap(),
            &(&t(1, 4) * &t(2, 6)).scale(&Rational::from(2)) + &t(0, 6)
        );
        assert!(grading_substitute(&p("lam"), 6, &cfg).is_err());
    }

    #[test]
    fn substitution_relations_are_density_relations() {
        let cfg = Config::new(2, 6).unwrap();
        let rels = substitution_relations(&cfg);
        let interior: Vec<Polynomial> = rels
            .iter()
            .filter(|r| !r.window_truncated)
            .map(|r| r.relation.clone())
            .collect();
        let fams = [RelationFamily::Quadratic, RelationFamily::DensityOne, RelationFamily::DensityTwo];
        let reference = RelationIdeal::new(interior_instances(&fams, &cfg));
        assert_eq!(ideal_compare(&RelationIdeal::new(interior), &reference), IdealComparison::Equal);
        assert!(rels.iter().any(|r| r.grade == 2 && r.window_truncated));
    }

    #[test]
    fn conjugation_first_order() {
        let s = infinitesimal(&Config::new(2, 4).unwrap()).unwrap();
        assert_eq!(conjugate_deformation(&s, &[]), s);
        let a = EndOp::term(p("x1"), xxi_monomial(&[0, 1], &[1, 0]));
        let c = s.phi(1).clone();
        let conj = conjugate_deformation(&s, &[(t(0, 3), a.clone())]);
        for x in test_fields(2, 2) {
            for g in 0..=4 {
                // Normal forms may differ by terms vanishing on grade g.
                let diff = &conj.phi(1).op_at(&x, g, 4) - &c.op_at(&x, g, 4);
                let want = EndOp::lie(&x).commutator(&a).scale_poly(&t(0, 3));
                for q in monomial_symbols(2, 3, g as u32) {
                    assert_eq!(diff.apply(&q), want.apply(&q), "{x} on {q}");
                }
            }
        }
    }

    #[test]
    fn conjugation_preserves_solutions_and_relations() {
        let cfg = Config::new(2, 4).unwrap();
        let s1 = infinitesimal(&cfg).unwrap();
        let (s2, r2) = solve_order(&s1, 2).unwrap();
        let a = EndOp::div(2);
        let conj = conjugate_deformation(&s2, &[(t(0, 2), a.clone())]);
        assert!(verify_order(&conj, 2).unwrap().iter().all(|c| c.all_zero));
        // Solving again after conjugating the first order gives the same ideal.
        let c1 = conjugate_deformation(&s1, &[(t(0, 2), a)]);
        let (c2, _) = solve_order(&c1, 2).unwrap();
        assert_eq!(ideal_compare(c2.ideal(), s2.ideal()), IdealComparison::Equal);
        assert!(r2.iter().all(|r| r.certificate.all_zero));
    }
}
