//! Differential operators as total symbols, the modules `𝒟_{λ,μ}`, and the
//! Weyl transform `exp(λ Div)`.
//!
//! `λ` and `μ` are the parameter variables `lam` and `mu`; numeric values
//! are obtained by substitution.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ansatz::SchemeCombination;
use crate::error::{Error, Result};
use crate::linsolve::{solve_affine, LinearSystem};
use crate::operator::EndOp;
use crate::poly::{Monomial, Polynomial, VarId};
use crate::rational::Rational;
use crate::symbol::{div_poly, exponent_vectors, xxi_monomial, VectorField};

/// `λ` as a polynomial.
pub fn lam() -> Polynomial {
    Polynomial::var(VarId::lambda())
}

/// `μ` as a polynomial.
pub fn mu() -> Polynomial {
    Polynomial::var(VarId::mu())
}

fn inv_factorial(k: &[u32]) -> Rational {
    let mut f = 1i64;
    for &e in k {
        for j in 2..=e as i64 {
            f *= j;
        }
    }
    Rational::new(1, f)
}

fn xi_degree(p: &Polynomial) -> u32 {
    p.terms().map(|(m, _)| m.xi_degree()).max().unwrap_or(0)
}

/// Total-symbol composition `a ∘ b = Σ (1/κ!) ∂_ξ^κ a · ∂_x^κ b`.
pub fn compose_sym(a: &Polynomial, b: &Polynomial, dim: usize) -> Polynomial {
    let mut out = Polynomial::zero();
    for k in 0..=xi_degree(a) {
        for kappa in exponent_vectors(dim, k) {
            let da = a.partial_multi(&xxi_monomial(&[], &kappa));
            if da.is_zero() {
                continue;
            }
            let db = b.partial_multi(&xxi_monomial(&kappa, &[]));
            if db.is_zero() {
                continue;
            }
            out = &out + &(&da * &db).scale(&inv_factorial(&kappa));
        }
    }
    out
}

/// `i^λ(X) = X + λ Div(X)` for a parameter polynomial `weight`.
pub fn embed(x: &VectorField, weight: &Polynomial) -> Polynomial {
    x.value() + &(weight * &x.divergence())
}

pub fn embed_lambda(x: &VectorField) -> Polynomial {
    embed(x, &lam())
}

/// `ℒ^{λ,μ}_X(A) = i^μ(X) ∘ A − A ∘ i^λ(X)` with the given weights.
pub fn dlm_action_with(
    x: &VectorField,
    a: &Polynomial,
    lambda: &Polynomial,
    mu: &Polynomial,
) -> Polynomial {
    let n = x.dim();
    &compose_sym(&embed(x, mu), a, n) - &compose_sym(a, &embed(x, lambda), n)
}

pub fn dlm_action(x: &VectorField, a: &Polynomial) -> Polynomial {
    dlm_action_with(x, a, &lam(), &mu())
}

/// The action of `X` on `𝒟_{λ,μ}` as an operator on symbols:
/// `L_X + (μ−λ)Div X − Σ_{|κ|≥2} ∂_x^κ X ∂_ξ^κ/κ! − λ Σ_{|κ|≥1} ∂_x^κ Div X ∂_ξ^κ/κ!`.
pub fn dlm_operator(x: &VectorField) -> EndOp {
    let n = x.dim();
    let div = x.divergence();
    let mut op = EndOp::lie(x);
    op.add_term(Monomial::one(), &(&mu() - &lam()) * &div);
    let max = x.value().total_degree().unwrap_or(0);
    for k in 1..=max {
        for kappa in exponent_vectors(n, k) {
            let f = inv_factorial(&kappa);
            let key = xxi_monomial(&[], &kappa);
            let xk = xxi_monomial(&kappa, &[]);
            if k >= 2 {
                op.add_term(key.clone(), -&x.value().partial_multi(&xk).scale(&f));
            }
            let dk = div.partial_multi(&xk);
            op.add_term(key, -&(&lam() * &dk).scale(&f));
        }
    }
    op
}

/// `exp(w Div) A`, exact because `Div` is nilpotent on polynomials.
pub fn weyl_transform_with(a: &Polynomial, w: &Polynomial, dim: usize) -> Polynomial {
    let mut out = a.clone();
    let mut term = a.clone();
    let mut j = 1i64;
    loop {
        term = (&div_poly(&term, dim) * w).scale(&Rational::new(1, j));
        if term.is_zero() {
            return out;
        }
        out = &out + &term;
        j += 1;
    }
}

pub fn weyl_transform(a: &Polynomial, dim: usize) -> Polynomial {
    weyl_transform_with(a, &lam(), dim)
}

/// `exp(−λ Div) ∘ ℒ_X ∘ exp(λ Div) = Σ (−λ)^j/j! ad_Div^j ℒ_X`; the series
/// ends because each `ad_Div` lowers coefficient degree.
pub fn conjugated_operator(x: &VectorField) -> EndOp {
    conjugated_operator_with(x, &lam())
}

/// `exp(−w Div) ∘ ℒ_X ∘ exp(w Div)` for a parameter polynomial `w`.
pub fn conjugated_operator_with(x: &VectorField, w: &Polynomial) -> EndOp {
    let n = x.dim();
    let div = EndOp::div(n);
    let mut out = dlm_operator(x);
    let mut term = out.clone();
    let mut j = 1i64;
    loop {
        term = div
            .commutator(&term)
            .scale_poly(&(-w))
            .scale(&Rational::new(1, j));
        if term.is_zero() {
            return out;
        }
        out = &out + &term;
        j += 1;
    }
}

/// The conjugated action split by shift.
pub fn conjugated_action(x: &VectorField) -> BTreeMap<i64, EndOp> {
    conjugated_operator(x).shift_decompose()
}

/// Result of fitting `piece_i = τ_i c_i` on a set of fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauFit {
    pub tau: Polynomial,
    /// Reduced basis of what could not be absorbed into `τ_i c_i`.
    pub residue: Vec<Polynomial>,
}

/// Fits the shift-`i` piece of the conjugated action against `c_i` on the
/// given fields. The Lie derivative is removed from the shift-0 piece first.
pub fn tau_fit(i: usize, fields: &[VectorField]) -> TauFit {
    let ci = SchemeCombination::standard(i);
    let mut sys = LinearSystem::new(1);
    for x in fields {
        let mut piece = conjugated_action(x).remove(&(i as i64)).unwrap_or_default();
        if i == 0 {
            piece = &piece - &EndOp::lie(x);
        }
        let target = ci.operator(x);
        // Every (derivative key, symbol monomial) slot gives one equation.
        let mut slots: BTreeMap<(Monomial, Monomial), (Rational, Polynomial)> = BTreeMap::new();
        for (k, c) in target.terms() {
            for (m, v) in c.terms() {
                slots.entry((k.clone(), m.clone())).or_default().0 = v.clone();
            }
        }
        for (k, c) in piece.terms() {
            for (m, pc) in c.by_symbol_part() {
                slots.entry((k.clone(), m)).or_default().1 = pc;
            }
        }
        for (_, (a, rhs)) in slots {
            sys.push_row(alloc::vec![a], rhs);
        }
    }
    let sol = solve_affine(&sys);
    TauFit {
        tau: sol.particular.into_iter().next().unwrap_or_default(),
        residue: sol.relations,
    }
}

/// The three Weyl parameters with a residue flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauReport {
    pub tau: [Polynomial; 3],
    pub residues: [Vec<Polynomial>; 3],
}

impl TauReport {
    pub fn residue_zero(&self) -> bool {
        self.residues.iter().all(|r| r.is_empty())
    }
}

/// Extracts `(τ_0, τ_1, τ_2)` on all monomial fields of degree `≤ max_deg`.
pub fn tau_report(dim: usize, max_deg: u32) -> TauReport {
    let fields = crate::cochain::test_fields(dim, max_deg);
    let fits: Vec<TauFit> = (0..3).map(|i| tau_fit(i, &fields)).collect();
    TauReport {
        tau: [fits[0].tau.clone(), fits[1].tau.clone(), fits[2].tau.clone()],
        residues: [
            fits[0].residue.clone(),
            fits[1].residue.clone(),
            fits[2].residue.clone(),
        ],
    }
}

/// `tau_extract`: `(τ_0, τ_1, τ_2)`, or the residue when some shift piece is
/// not an exact multiple of its cocycle.
pub fn tau_extract(dim: usize, max_deg: u32) -> Result<[Polynomial; 3]> {
    let r = tau_report(dim, max_deg);
    for (i, res) in r.residues.iter().enumerate() {
        if let Some(w) = res.first() {
            return Err(Error::UnexpectedResidue {
                shift: i,
                witness: alloc::format!("{w}"),
            });
        }
    }
    Ok(r.tau)
}

/// The Weyl parameters `τ_0 = μ−λ`, `τ_1 = λ−½`, `τ_2 = λ(λ−1)` as
/// polynomials in `λ, μ`.
pub fn tau_values() -> [Polynomial; 3] {
    let l = lam();
    [
        &mu() - &l,
        &l - &Polynomial::constant(Rational::new(1, 2)),
        &(&l * &l) - &l,
    ]
}

/// Exponents `(m_1, m_2)` with `m_1 + 2 m_2 = m`, largest `m_1` first.
pub fn shift_monomials(m: u32) -> Vec<(u32, u32)> {
    (0..=m / 2).map(|m2| (m - 2 * m2, m2)).collect()
}

/// Whether `τ_0` is an independent parameter or vanishes (`μ = λ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Setting {
    Generic,
    Diagonal,
}

impl Setting {
    fn specialize(self, p: &Polynomial) -> Polynomial {
        match self {
            Setting::Generic => p.clone(),
            Setting::Diagonal => {
                let mut m = BTreeMap::new();
                m.insert(VarId::mu(), lam());
                p.substitute(&m)
            }
        }
    }
}

fn tau_monomial(e: &[u32; 3], taus: &[Polynomial; 3]) -> Polynomial {
    let mut out = Polynomial::one();
    for (t, &k) in taus.iter().zip(e.iter()) {
        out = &out * &t.pow(k);
    }
    out
}

fn lam_mu_degree(op: &EndOp) -> u32 {
    op.terms()
        .flat_map(|(_, c)| c.terms())
        .map(|(m, _)| m.split_params().1.degree())
        .max()
        .unwrap_or(0)
}

/// Writes a shift-`m` piece as `Σ τ_0^{m_0} τ_1^{m_1} τ_2^{m_2} · Op` with
/// `m_1 + 2m_2 = m` and λ, μ-free operators `Op`. On failure returns the
/// derivative key and the part of its coefficient that admits no such
/// expansion.
pub fn decompose_piece(
    piece: &EndOp,
    m: u32,
    setting: Setting,
) -> core::result::Result<BTreeMap<[u32; 3], EndOp>, (Monomial, Polynomial)> {
    let taus = tau_values().map(|t| setting.specialize(&t));
    let top = lam_mu_degree(piece);
    let max_m0 = match setting {
        Setting::Generic => top.saturating_sub(m),
        Setting::Diagonal => 0,
    };
    let mut monos: Vec<[u32; 3]> = Vec::new();
    for (m1, m2) in shift_monomials(m) {
        for m0 in 0..=max_m0 {
            if m0 + m1 + 2 * m2 <= top.max(m) {
                monos.push([m0, m1, m2]);
            }
        }
    }
    let expanded: Vec<Polynomial> = monos.iter().map(|e| tau_monomial(e, &taus)).collect();
    let mut out: BTreeMap<[u32; 3], EndOp> = BTreeMap::new();
    for (key, c) in piece.terms() {
        // Rows are λ, μ-monomials; the right side collects, for each row, the
        // x, ξ-part of the coefficient so one solve handles the whole slot.
        let mut rows: BTreeMap<Monomial, (Vec<Rational>, Polynomial)> = BTreeMap::new();
        for (j, t) in expanded.iter().enumerate() {
            for (mono, v) in t.terms() {
                rows.entry(mono.clone())
                    .or_insert_with(|| (alloc::vec![Rational::ZERO; monos.len()], Polynomial::zero()))
                    .0[j] = v.clone();
            }
        }
        for (mono, v) in c.terms() {
            let (sym, par) = mono.split_params();
            rows.entry(par)
                .or_insert_with(|| (alloc::vec![Rational::ZERO; monos.len()], Polynomial::zero()))
                .1
                .add_term(sym, v);
        }
        let mut sys = LinearSystem::new(monos.len());
        for (_, (row, rhs)) in rows {
            sys.push_row(row, rhs);
        }
        let sol = solve_affine(&sys);
        if let Some(w) = sol.relations.into_iter().next() {
            return Err((key.clone(), w));
        }
        for (e, p) in monos.iter().zip(sol.particular) {
            if !p.is_zero() {
                out.entry(*e).or_default().add_term(key.clone(), p);
            }
        }
    }
    Ok(out)
}

/// Outcome of [`monomial_independence_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceVerdict {
    pub max_shift: u32,
    pub setting: Setting,
    /// Monomials `(m_0, m_1, m_2)` met in each shift.
    pub monomials: BTreeMap<u32, Vec<[u32; 3]>>,
    /// First shift whose piece is not a combination of the allowed
    /// monomials, with the offending derivative key and coefficient part.
    pub undecomposable: Option<(u32, Monomial, Polynomial)>,
    /// Whether the action identity holds with `τ_0, τ_1, τ_2` independent.
    pub identities_hold: bool,
    pub pairs_checked: usize,
}

impl IndependenceVerdict {
    pub fn holds(&self) -> bool {
        self.undecomposable.is_none() && self.identities_hold
    }
}

fn tau_op(parts: &BTreeMap<[u32; 3], EndOp>) -> EndOp {
    let mut out = EndOp::zero();
    for (e, op) in parts {
        let mut t = Polynomial::one();
        for (i, &k) in e.iter().enumerate() {
            t = &t * &Polynomial::var(VarId::tau(i)).pow(k);
        }
        out.add_scaled(op, &t);
    }
    out
}

/// Decomposes every shift `≤ max_shift` of the conjugated action over the
/// monomials `τ_0^{m_0} τ_1^{m_1} τ_2^{m_2}`, `m_1 + 2m_2 = m`, then checks
/// the action identity shift by shift with the `τ_i` as free parameters.
pub fn monomial_independence_check(
    max_shift: u32,
    dim: usize,
    max_deg: u32,
    setting: Setting,
) -> IndependenceVerdict {
    let fields = crate::cochain::test_fields(dim, max_deg);
    let mut verdict = IndependenceVerdict {
        max_shift,
        setting,
        monomials: BTreeMap::new(),
        undecomposable: None,
        identities_hold: true,
        pairs_checked: 0,
    };
    let rho = |x: &VectorField, v: &mut IndependenceVerdict| -> Option<EndOp> {
        let pieces = conjugated_operator(x)
            .map_coeffs(|c| setting.specialize(c))
            .shift_decompose();
        let mut parts = BTreeMap::new();
        for m in 0..=max_shift {
            let piece = pieces.get(&(m as i64)).cloned().unwrap_or_default();
            match decompose_piece(&piece, m, setting) {
                Ok(p) => {
                    let seen = v.monomials.entry(m).or_default();
                    for e in p.keys() {
                        if !seen.contains(e) {
                            seen.push(*e);
                            seen.sort();
                        }
                    }
                    parts.extend(p.into_iter().map(|(e, op)| ((m, e), op)));
                }
                Err((key, w)) => {
                    if v.undecomposable.is_none() {
                        v.undecomposable = Some((m, key, w));
                    }
                    return None;
                }
            }
        }
        let mut flat: BTreeMap<[u32; 3], EndOp> = BTreeMap::new();
        for ((_, e), op) in parts {
            let slot = flat.entry(e).or_default();
            *slot = &*slot + &op;
        }
        Some(tau_op(&flat))
    };
    let ops: Vec<Option<EndOp>> = fields.iter().map(|x| rho(x, &mut verdict)).collect();
    if verdict.undecomposable.is_some() {
        verdict.identities_hold = false;
        return verdict;
    }
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            let xy = fields[i].bracket(&fields[j]).expect("same dimension");
            let Some(lhs) = rho(&xy, &mut verdict) else {
                verdict.identities_hold = false;
                return verdict;
            };
            let (a, b) = (ops[i].as_ref().unwrap(), ops[j].as_ref().unwrap());
            let diff = &lhs - &a.commutator(b);
            verdict.pairs_checked += 1;
            let bad = diff
                .shift_decompose()
                .into_iter()
                .any(|(s, piece)| s <= max_shift as i64 && !piece.is_zero());
            if bad {
                verdict.identities_hold = false;
                return verdict;
            }
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vf(s: &str) -> VectorField {
        VectorField::parse(s, 2).unwrap()
    }

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    #[test]
    fn composition_examples() {
        assert_eq!(compose_sym(&p("xi1"), &p("x1"), 2), p("x1*xi1 + 1"));
        let a = p("x1^2*xi1*xi2 + x2");
        assert_eq!(compose_sym(&a, &p("1"), 2), a);
        assert_eq!(compose_sym(&p("1"), &a, 2), a);
        let l = compose_sym(&compose_sym(&p("xi1"), &p("xi2"), 2), &p("x1*x2"), 2);
        let r = compose_sym(&p("xi1"), &compose_sym(&p("xi2"), &p("x1*x2"), 2), 2);
        assert_eq!(l, r);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed_lambda(&vf("x1*xi1")), p("x1*xi1 + lam"));
        let x = vf("x1^2*xi2");
        assert_eq!(embed(&x, &Polynomial::zero()), *x.value());
    }

    #[test]
    fn action_on_one() {
        let x = vf("x1^2*xi1 + x2*xi2");
        assert_eq!(dlm_action(&x, &p("1")), &(&mu() - &lam()) * &x.divergence());
    }

    #[test]
    fn operator_matches_composition() {
        let x = vf("x1^3*xi1 + x1*x2^2*xi2");
        let op = dlm_operator(&x);
        for a in ["x1*xi1^2", "x2^2*xi1*xi2^2 + x1", "xi1^3*x1^2"] {
            assert_eq!(op.apply(&p(a)), dlm_action(&x, &p(a)), "{a}");
        }
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(weyl_transform(&p("x1*xi1"), 2), p("x1*xi1 + lam"));
        assert_eq!(weyl_transform(&p("xi1"), 2), p("xi1"));
        let a = p("x1^2*x2*xi1^2*xi2 + x2*xi2");
        let back = weyl_transform_with(&weyl_transform(&a, 2), &(-&lam()), 2);
        assert_eq!(back, a);
    }

    #[test]
    fn conjugation_matches_weyl_sandwich() {
        let x = vf("x1^2*xi2 + x1*x2*xi1");
        let conj = conjugated_operator(&x);
        for a in ["x1*xi1^2", "x2*xi1*xi2 + x1^2*xi2^2", "xi1^3"] {
            let direct = weyl_transform_with(&dlm_action(&x, &weyl_transform(&p(a), 2)), &(-&lam()), 2);
            assert_eq!(conj.apply(&p(a)), direct, "{a}");
        }
    }

    #[test]
    fn shift_zero_piece() {
        let x = vf("x1^2*xi1 + x2*xi2");
        let pieces = conjugated_action(&x);
        let want = &EndOp::lie(&x) + &EndOp::multiplication(&(&mu() - &lam()) * &x.divergence());
        assert_eq!(pieces.get(&0).cloned().unwrap_or_default(), want);
    }

    #[test]
    fn tau_monomials() {
        assert_eq!(shift_monomials(0), [(0, 0)]);
        assert_eq!(shift_monomials(3), [(3, 0), (1, 1)]);
        assert_eq!(shift_monomials(4), [(4, 0), (2, 1), (0, 2)]);
        let [t0, t1, t2] = tau_values();
        assert_eq!(t0, &mu() - &lam());
        assert_eq!(t1, p("lam - 1/2"));
        assert_eq!(t2, p("lam^2 - lam"));
    }

    #[test]
    fn independence_settings() {
        let d = monomial_independence_check(2, 2, 2, Setting::Diagonal);
        assert!(d.holds(), "{d:?}");
        assert_eq!(d.monomials.get(&2).unwrap(), &[[0, 0, 1], [0, 2, 0]]);
        let g = monomial_independence_check(1, 2, 2, Setting::Generic);
        assert!(!g.holds());
        assert_eq!(g.undecomposable.as_ref().map(|u| u.0), Some(1));
        assert!(monomial_independence_check(0, 2, 2, Setting::Generic).holds());
    }
}
