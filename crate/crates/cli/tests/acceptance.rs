//! Acceptance criteria 1 to 10, one verdict line each.
//!
//! Every criterion is evaluated in full and its verdict printed as is.
//! Some criteria are known not to hold for the exact computation; they are
//! listed in `KNOWN_FAILURES` with the reason. The target fails when any
//! verdict differs from that list, in either direction.

use std::collections::BTreeMap;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use symdef_core::cochain::{ce_diff0, ce_diff1, cup, standard_cocycle, Atom1, Cochain1};
use symdef_core::deformation::{
    infinitesimal, interior_instances, run_pipeline, solve_order, Config, PipelineSummary, INTERIOR_MIN_GRADE,
};
use symdef_core::density::{compose_sym, embed_lambda, lam, weyl_transform, weyl_transform_with};
use symdef_core::ideal::{ideal_compare, IdealComparison, RelationFamily, RelationIdeal};
use symdef_core::symbol::xxi_monomial;
use symdef_core::{poisson_bracket, EndOp, Polynomial, Rational, SchemeDescriptor, Symbol, VarId, VectorField};

const KNOWN_FAILURES: &[(usize, &str)] = &[
    (2, "the computed [[c0,c2]] is the negative of the stated display; the [[c1,c2]] display matches only some samples"),
    (3, "graded t0 cross terms add two relations per grade at order 2; beta3 has the opposite sign"),
    (4, "with t2 off, (t0[k]-t0[k-1])*t1[k] is still a relation at order 2"),
    (5, "the order-3 ideal equals the density-module ideal, strictly larger"),
    (7, "the conjugated action has off-diagonal residues at shifts 1 and 2"),
    (10, "order 4 adds nothing, but the accumulated ideal already exceeds the integrability ideal"),
];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn p(s: &str) -> Polynomial {
    Polynomial::parse(s).unwrap()
}

fn t(i: usize, k: usize) -> Polynomial {
    Polynomial::var(VarId::t(i, k))
}

fn run_cli(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["symdef"];
    argv.extend_from_slice(args);
    let out = symdef::execute(argv);
    let doc = serde_json::from_str(&out.output).unwrap_or(Value::Null);
    (out.code, doc)
}

// Random data.

fn random_field(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> VectorField {
    let mut f = VectorField::new(Symbol::zero(dim)).unwrap();
    while f.is_zero() {
        for _ in 0..rng.random_range(1..=3) {
            let mut e = vec![0u32; dim];
            for _ in 0..rng.random_range(0..=max_deg) {
                e[rng.random_range(0..dim)] += 1;
            }
            let c = Rational::from(rng.random_range(-3i64..=3));
            f = f.add(&VectorField::monomial(&e, rng.random_range(1..=dim)).scale(&c));
        }
    }
    f
}

fn random_symbol(rng: &mut ChaCha8Rng, dim: usize, max_x: u32, grades: std::ops::RangeInclusive<u32>) -> Polynomial {
    let mut out = Polynomial::zero();
    for _ in 0..rng.random_range(1..=2) {
        let (mut a, mut b) = (vec![0u32; dim], vec![0u32; dim]);
        for _ in 0..rng.random_range(0..=max_x) {
            a[rng.random_range(0..dim)] += 1;
        }
        for _ in 0..rng.random_range(grades.clone()) {
            b[rng.random_range(0..dim)] += 1;
        }
        out = &out + &Polynomial::term(Rational::from(rng.random_range(1i64..=3)), xxi_monomial(&a, &b));
    }
    out
}

fn random_operator(rng: &mut ChaCha8Rng) -> EndOp {
    let mut op = EndOp::zero();
    for _ in 0..3 {
        let c = random_symbol(rng, 2, 2, 0..=1);
        let dx = [rng.random_range(0..=1), rng.random_range(0..=1)];
        let dxi = [rng.random_range(0..=2), rng.random_range(0..=1)];
        op = &op + &EndOp::term(c, xxi_monomial(&dx, &dxi));
    }
    op
}

// Displays of the nonzero cup products, written as explicit index sums.

fn d(q: &Polynomial, vars: &[VarId]) -> Polynomial {
    vars.iter().fold(q.clone(), |acc, v| acc.partial(*v).unwrap())
}

fn x(i: usize) -> VarId {
    VarId::X(i as u8)
}

fn xi(i: usize) -> VarId {
    VarId::Xi(i as u8)
}

fn antisym(f: impl Fn(&Polynomial, &Polynomial) -> Polynomial, a: &Polynomial, b: &Polynomial) -> Polynomial {
    &f(a, b) - &f(b, a)
}

/// `−2 ∂_i∂_j X · ∂_l∂_m∂_{ξ_i} Y · ∂_{ξ_j}∂_{ξ_l}∂_{ξ_m} P − (X↔Y)`.
fn display_c1c1_half(n: usize, a: &Polynomial, b: &Polynomial, q: &Polynomial) -> Polynomial {
    antisym(
        |a, b| {
            let mut s = Polynomial::zero();
            for i in 1..=n {
                for j in 1..=n {
                    for l in 1..=n {
                        for m in 1..=n {
                            let term = &(&d(a, &[x(i), x(j)]) * &d(b, &[x(l), x(m), xi(i)])) * &d(q, &[xi(j), xi(l), xi(m)]);
                            s = &s + &term;
                        }
                    }
                }
            }
            s.scale(&Rational::from(-2))
        },
        a,
        b,
    )
}

/// `3 ∂_i∂_j∂_{ξ_i} X · ∂_l∂_m∂_{ξ_j} Y · ∂_{ξ_l}∂_{ξ_m} P − (X↔Y)`.
fn display_c0c2(n: usize, a: &Polynomial, b: &Polynomial, q: &Polynomial) -> Polynomial {
    antisym(
        |a, b| {
            let mut s = Polynomial::zero();
            for i in 1..=n {
                for j in 1..=n {
                    for l in 1..=n {
                        for m in 1..=n {
                            let term = &(&d(a, &[x(i), x(j), xi(i)]) * &d(b, &[x(l), x(m), xi(j)])) * &d(q, &[xi(l), xi(m)]);
                            s = &s + &term;
                        }
                    }
                }
            }
            s.scale(&Rational::from(3))
        },
        a,
        b,
    )
}

/// The three-term display of `⟦c_1, c_2⟧`.
fn display_c1c2(n: usize, a: &Polynomial, b: &Polynomial, q: &Polynomial) -> Polynomial {
    antisym(
        |a, b| {
            let mut s = Polynomial::zero();
            for i in 1..=n {
                for j in 1..=n {
                    for l in 1..=n {
                        for m in 1..=n {
                            for pp in 1..=n {
                                let t1 = &(&d(a, &[x(i), x(j)]) * &d(b, &[x(l), x(m), x(pp), xi(i)]))
                                    * &d(q, &[xi(j), xi(l), xi(m), xi(pp)]);
                                let t2 = &(&d(a, &[x(i), x(j), xi(l)]) * &d(b, &[x(l), x(m), x(pp)]))
                                    * &d(q, &[xi(i), xi(j), xi(m), xi(pp)]);
                                let t3 = &(&d(a, &[x(i), x(j), x(l), xi(m)]) * &d(b, &[x(m), x(pp), xi(l)]))
                                    * &d(q, &[xi(i), xi(j), xi(pp)]);
                                s = &s + &t1.scale(&Rational::from(-2));
                                s = &s + &t2.scale(&Rational::from(6));
                                s = &s - &t3.scale(&Rational::from(6));
                            }
                        }
                    }
                }
            }
            s
        },
        a,
        b,
    )
}

type Display = fn(usize, &Polynomial, &Polynomial, &Polynomial) -> Polynomial;

/// Compares the engine cup with a display on sampled triples with a
/// nonzero engine value. Returns (agreements, opposite-sign agreements,
/// samples).
fn compare_display(i: usize, j: usize, scale: Rational, display: Display, rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    let n = 2;
    let w = cup(&standard_cocycle(i), &standard_cocycle(j));
    let (mut same, mut opposite, mut samples) = (0, 0, 0);
    let mut tries = 0;
    while samples < 12 && tries < 2000 {
        tries += 1;
        let fx = random_field(rng, n, 4);
        let fy = random_field(rng, n, 4);
        let q = random_symbol(rng, n, 2, 2..=5);
        let engine = w.eval(&fx, &fy).unwrap().apply(&q).scale(&scale);
        if engine.is_zero() {
            continue;
        }
        samples += 1;
        let shown = display(n, fx.value(), fy.value(), &q);
        if engine == shown {
            same += 1;
        } else if engine == -&shown {
            opposite += 1;
        }
    }
    (same, opposite, samples)
}

// Criteria.

fn criterion_1() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for dim in ["2", "3"] {
        let (code, doc) = run_cli(&["verify", "cocycles", "--dim", dim, "--xdeg", "5", "--grades", "8"]);
        let pairs: Vec<String> = doc["cocycles"]
            .as_array()
            .map(|a| a.iter().map(|c| format!("{}:{}", c["cocycle"].as_str().unwrap_or("?"), c["pairs_checked"])).collect())
            .unwrap_or_default();
        ok &= code == 0 && doc["status"] == "pass";
        notes.push(format!("n={dim} [{}]", pairs.join(" ")));
    }
    verdict(ok, format!("delta c_i vanishes in operator normal form: {}", notes.join(", ")))
}

fn criterion_2() -> Verdict {
    let (code, doc) = run_cli(&["cup", "table"]);
    let records = doc["records"].as_array().cloned().unwrap_or_default();
    let class = |l: &str, r: &str| {
        records
            .iter()
            .find(|x| x["left"] == l && x["right"] == r)
            .and_then(|x| x["class"].as_str().map(String::from))
            .unwrap_or_default()
    };
    let low_zero = class("c0", "c0") == "zero" && class("c0", "c1") == "zero";
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (s02, o02, n02) = compare_display(0, 2, Rational::ONE, display_c0c2, &mut rng);
    let (s12, o12, n12) = compare_display(1, 2, Rational::ONE, display_c1c2, &mut rng);
    let (s11, o11, n11) = compare_display(1, 1, Rational::new(1, 2), display_c1c1_half, &mut rng);
    let c11 = class("c1", "c1");
    let c11_note = format!(
        "[[c1,c1]] is {c11}: {} as a map, {} in cohomology; half-cup display {s11}/{n11}",
        if c11 == "zero" { "zero" } else { "nonzero" },
        if c11 == "essential" { "nonzero" } else { "zero" }
    );
    let ok = code == 0 && low_zero && s02 == n02 && n02 >= 10 && s12 == n12 && n12 >= 10 && !c11.is_empty();
    verdict(
        ok,
        format!(
            "[[c0,c0]],[[c0,c1]] zero: {low_zero}; [[c0,c2]] display {s02}/{n02} (opposite sign {o02}); \
             [[c1,c2]] display {s12}/{n12} (opposite sign {o12}); {c11_note} (opposite sign {o11})"
        ),
    )
}

fn criterion_3(summary: &PipelineSummary) -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for r in summary.reports.iter().filter(|r| r.order == 2 && r.grade >= INTERIOR_MIN_GRADE) {
        let k = r.grade;
        let quad = RelationFamily::Quadratic.instance(k);
        let single = r.relations.len() == 1 && RelationIdeal::new(r.relations.clone()) == RelationIdeal::new(vec![quad.clone()]);
        let c = |desc: SchemeDescriptor| r.coefficients.get(&desc).cloned().unwrap_or_default();
        let (a3, b3, a4, g3, a5, g4) = (
            c(SchemeDescriptor::a(3, 0)),
            c(SchemeDescriptor::b(3, 0)),
            c(SchemeDescriptor::a(4, 0)),
            c(SchemeDescriptor::c(4, 0)),
            c(SchemeDescriptor::a(5, 0)),
            c(SchemeDescriptor::c(5, 0)),
        );
        let modq = RelationIdeal::new(vec![quad]);
        let i = |n: i64| Rational::from(n);
        let eqs = [
            ("3a3", &a3.scale(&i(3)) + &(&t(1, k - 1) * &t(1, k)).scale(&i(2))),
            ("b3", &b3 - &(&t(0, k) * &t(2, k)).scale(&i(3))),
            ("4a4+g3", &(&a4.scale(&i(4)) + &g3) + &(&t(1, k - 2) * &t(2, k)).scale(&i(2))),
            ("2a4", &a4.scale(&i(2)) + &(&t(2, k - 1) * &t(1, k)).scale(&i(2))),
            ("g3", &g3 - &(&t(2, k - 1) * &t(1, k)).scale(&i(2))),
            ("10a5", &a5.scale(&i(10)) + &(&t(2, k - 2) * &t(2, k)).scale(&i(3))),
            ("2g4", &g4.scale(&i(2)) - &(&t(2, k - 2) * &t(2, k)).scale(&i(3))),
        ];
        // A(5,0) carries five ξ-derivatives and is void on grades below 5.
        let bad: Vec<&str> = eqs
            .iter()
            .filter(|(n, _)| !(*n == "10a5" && k < 5))
            .filter(|(_, e)| !modq.contains(e))
            .map(|(n, _)| *n)
            .collect();
        ok &= single && bad.is_empty();
        notes.push(format!(
            "k={k}: {} relation(s){}",
            r.relations.len(),
            if bad.is_empty() { String::new() } else { format!(", mismatched {}", bad.join(",")) }
        ));
    }
    verdict(ok, notes.join("; "))
}

fn criterion_4() -> Verdict {
    let (code, doc) = run_cli(&["mc", "solve", "--order", "3", "--families", "t0,t1"]);
    let rels: Vec<String> = doc["reports"]
        .as_array()
        .map(|a| {
            a.iter()
                .flat_map(|r| r["relations"].as_array().cloned().unwrap_or_default())
                .filter_map(|p| p.as_str().map(String::from))
                .collect()
        })
        .unwrap_or_default();
    let ok = code == 0 && rels.is_empty();
    verdict(
        ok,
        format!(
            "exit {code}, {} relation(s) at orders 2-3{}",
            rels.len(),
            rels.first().map(|r| format!(", e.g. {r}")).unwrap_or_default()
        ),
    )
}

fn criterion_5(summary: &PipelineSummary) -> Verdict {
    let theorem = RelationIdeal::new(interior_instances(
        &[RelationFamily::Quadratic, RelationFamily::CubicOne, RelationFamily::CubicTwo],
        &summary.state.config().clone(),
    ));
    let cmp = ideal_compare(&summary.interior, &theorem);
    let back = ideal_compare(&theorem, &summary.interior);
    let ok = cmp == IdealComparison::Equal && back == IdealComparison::Equal;
    let w = match &cmp {
        IdealComparison::StrictlyContains { witness } => format!(", witness {witness}"),
        _ => String::new(),
    };
    verdict(
        ok,
        format!("solved interior ideal vs integrability ideal: {}{w}; reverse: {}", cmp.name(), back.name()),
    )
}

fn criterion_6() -> Verdict {
    let (code, doc) = run_cli(&["ideal", "compare"]);
    let verdict_name = doc["comparison"]["verdict"].as_str().unwrap_or("").to_string();
    let witness = doc["comparison"]["witness"].as_str().map(p);
    let shape = witness.as_ref().is_some_and(|w| {
        (INTERIOR_MIN_GRADE..=8).any(|k| {
            let e = &(&t(0, k) - &t(0, k - 1)) * &t(1, k);
            *w == e || *w == -&e
        })
    });
    let sub = doc["substitution"]["verdict"]["verdict"].as_str().unwrap_or("").to_string();
    let ok = code == 0 && verdict_name == "first_strictly_contained" && shape && sub == "equal";
    verdict(
        ok,
        format!(
            "integrability vs density: {verdict_name}, witness {}; substitution ideal vs density: {sub}",
            witness.map(|w| w.to_string()).unwrap_or_else(|| "-".into())
        ),
    )
}

fn criterion_7() -> Verdict {
    let (code, doc) = run_cli(&["weyl", "tau"]);
    let got = [&doc["tau0"], &doc["tau1"], &doc["tau2"]].map(|v| v.as_str().map(p).unwrap_or_default());
    let want = [p("mu - lam"), p("lam - 1/2"), p("lam^2 - lam")];
    let exact = got == want;
    let residue_zero = doc["residue_zero"] == true;
    verdict(
        exact && residue_zero && code == 0,
        format!(
            "tau = ({}, {}, {}), residue_zero {residue_zero}, exit {code}",
            got[0], got[1], got[2]
        ),
    )
}

fn criterion_8() -> Verdict {
    let (code, doc) = run_cli(&["dlm", "check", "--xdeg", "5"]);
    let series = doc["checks"]
        .as_array()
        .and_then(|a| a.iter().find(|c| c["name"] == "explicit-series").cloned())
        .unwrap_or(Value::Null);
    let ok = code == 0 && series["status"] == "pass";
    verdict(
        ok,
        format!("explicit series equals composition on {} field/symbol cases", series["cases"]),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |name: &'static str, ok: bool| {
        let e = failures.entry(name).or_insert(0);
        if !ok {
            *e += 1;
        }
    };
    let cases = 24;
    for _ in 0..cases {
        let (a, b, c) = (random_operator(&mut rng), random_operator(&mut rng), random_operator(&mut rng));
        fail("operator associativity", a.compose(&b).compose(&c) == a.compose(&b.compose(&c)));
        let jac = &(&a.commutator(&b.commutator(&c)) + &b.commutator(&c.commutator(&a))) + &c.commutator(&a.commutator(&b));
        fail("commutator Jacobi", jac.is_zero());

        let s: Vec<Polynomial> = (0..3).map(|_| random_symbol(&mut rng, 2, 2, 0..=2)).collect();
        let l = compose_sym(&compose_sym(&s[0], &s[1], 2), &s[2], 2);
        let r = compose_sym(&s[0], &compose_sym(&s[1], &s[2], 2), 2);
        fail("symbol composition associativity", l == r);

        let w: Vec<Symbol> = s.iter().map(|q| Symbol::new(q.clone(), 2).unwrap()).collect();
        let pb = |u: &Symbol, v: &Symbol| poisson_bracket(u, v).unwrap();
        let pj = &(&*pb(&w[0], &pb(&w[1], &w[2])).value() + pb(&w[1], &pb(&w[2], &w[0])).value())
            + pb(&w[2], &pb(&w[0], &w[1])).value();
        fail("Poisson Jacobi", pj.is_zero());

        let fx = random_field(&mut rng, 2, 3);
        let fy = random_field(&mut rng, 2, 3);
        let dd = ce_diff1(&ce_diff0(&a)).eval(&fx, &fy).unwrap();
        fail("delta squared", dd.is_zero());

        let i = rng.random_range(0..3);
        let j = rng.random_range(0..3);
        let (ci, cj) = (standard_cocycle(i), standard_cocycle(j));
        fail("cup symmetry", cup(&ci, &cj).eval(&fx, &fy).unwrap() == cup(&cj, &ci).eval(&fx, &fy).unwrap());
        let scheme = Cochain1::atom(Atom1::Scheme(SchemeDescriptor::a(2, 0)));
        fail(
            "cup antisymmetry in arguments",
            cup(&scheme, &ci).eval(&fx, &fy).unwrap() == -&cup(&scheme, &ci).eval(&fy, &fx).unwrap(),
        );

        let back = weyl_transform_with(&weyl_transform(&s[0], 2), &-&lam(), 2);
        fail("Weyl invertibility", back == s[0]);

        let xy = fx.bracket(&fy).unwrap();
        let (ex, ey) = (embed_lambda(&fx), embed_lambda(&fy));
        let br = &compose_sym(&ex, &ey, 2) - &compose_sym(&ey, &ex, 2);
        fail("embedding homomorphism", embed_lambda(&xy) == br);
    }
    let strip = |v: &mut Value| {
        if let Some(m) = v.as_object_mut() {
            m.remove("timing");
        }
    };
    let mut deterministic = true;
    for args in [&["cup", "table"][..], &["ideal", "compare"][..], &["mc", "solve", "--order", "2", "--grades", "5"][..]] {
        let (_, mut a) = run_cli(args);
        let (_, mut b) = run_cli(args);
        strip(&mut a);
        strip(&mut b);
        deterministic &= a == b && a != Value::Null;
    }
    failures.insert("report determinism", usize::from(!deterministic));
    let bad: Vec<String> = failures.iter().filter(|(_, n)| **n > 0).map(|(k, n)| format!("{k} ({n})")).collect();
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} properties on {cases} seeded cases each, reports deterministic", failures.len() - 1)
        } else {
            format!("failing: {}", bad.join(", "))
        },
    )
}

fn criterion_10(summary: &PipelineSummary) -> Verdict {
    let (state4, reports4) = match solve_order(&summary.state, 4) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("order 4 failed: {e}")),
    };
    let new_interior: Vec<&Polynomial> = reports4
        .iter()
        .filter(|r| !r.window_truncated)
        .flat_map(|r| r.relations.iter())
        .collect();
    let flagged = reports4.iter().filter(|r| r.window_truncated && !r.relations.is_empty()).count();
    let certified = reports4.iter().all(|r| r.certificate.all_zero);
    let theorem = RelationIdeal::new(interior_instances(
        &[RelationFamily::Quadratic, RelationFamily::CubicOne, RelationFamily::CubicTwo],
        state4.config(),
    ));
    let interior: Vec<Polynomial> = summary
        .reports
        .iter()
        .chain(reports4.iter())
        .filter(|r| !r.window_truncated)
        .flat_map(|r| r.relations.iter().cloned())
        .collect();
    let outside: Vec<&Polynomial> = interior.iter().filter(|g| !theorem.contains(g)).collect();
    let ok = certified && outside.is_empty();
    verdict(
        ok,
        format!(
            "order 4: {} new interior generator(s), {flagged} flagged edge grade(s), certified {certified}; \
             {} of {} accumulated interior generator(s) outside the integrability ideal{}",
            new_interior.len(),
            outside.len(),
            interior.len(),
            outside.first().map(|g| format!(", e.g. {g}")).unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let cfg = Config::new(2, 8).unwrap();
    let summary = run_pipeline(&cfg, 3).expect("pipeline runs");
    debug_assert!(infinitesimal(&cfg).is_ok());
    let criteria: Vec<(usize, Verdict)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3(&summary)),
        (4, criterion_4()),
        (5, criterion_5(&summary)),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10(&summary)),
    ];
    let mut unexpected = Vec::new();
    for (n, v) in criteria.iter() {
        println!("criterion {n:>2}: {}  {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        let known = KNOWN_FAILURES.iter().find(|(k, _)| k == n);
        match (v.pass, known) {
            (false, Some((_, why))) => println!("              known deviation: {why}"),
            (false, None) => unexpected.push(format!("criterion {n} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {n} now passes; update the known failures")),
            (true, None) => {}
        }
    }
    let passed = criteria.iter().filter(|(_, v)| v.pass).count();
    println!("acceptance: {passed} of {} criteria pass", criteria.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
