//! The six commands. Each returns a finished [`Document`] except for
//! `mc solve`, whose `Err` is a usage problem.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symdef_core::cochain::{ce_diff1, cochain2_is_zero_on, cup, cup_class, standard_cocycle, test_fields, CupClass};
use symdef_core::deformation::{
    interior_instances, run_pipeline, slice_degree, substitution_relations, verify_order_on, Config,
};
use symdef_core::density::{dlm_action, dlm_operator, monomial_independence_check, tau_report, Setting};
use symdef_core::ideal::{ideal_compare as compare, IdealComparison, RelationFamily, RelationIdeal};
use symdef_core::symbol::{monomial_symbols, xxi_monomial};
use symdef_core::{Error, Polynomial, Rational, VarId, VectorField};

use crate::report::*;
use crate::RunConfig;

const COCYCLE_XDEG: u32 = 5;
const CUP_XDEG: u32 = 3;
const CUP_SAMPLES: usize = 10;
const WEYL_XDEG: u32 = 3;
const INDEPENDENCE_SHIFT: u32 = 4;
const DLM_XDEG: u32 = 5;
const DLM_SAMPLES: usize = 16;

fn core_config(cfg: &RunConfig) -> Result<Config, String> {
    Config::new(cfg.dim, cfg.grades)
        .map(|c| c.with_families(cfg.families))
        .map_err(|e| e.to_string())
}

pub fn verify_cocycles(cfg: &RunConfig) -> Document {
    let xdeg = cfg.xdeg.unwrap_or(COCYCLE_XDEG);
    let fields = test_fields(cfg.dim, xdeg);
    let cocycles: Vec<CocycleResult> = (0..3)
        .map(|i| {
            let d = ce_diff1(&standard_cocycle(i));
            let (pairs_checked, witnesses) = match cochain2_is_zero_on(&d, &fields).expect("fields share a dimension") {
                Ok(n) => (n, Vec::new()),
                Err(w) => (0, vec![WitnessJson::from(&w)]),
            };
            CocycleResult {
                cocycle: format!("c{i}"),
                status: Status::from_bool(witnesses.is_empty()),
                pairs_checked,
                witnesses,
            }
        })
        .collect();
    let ok = cocycles.iter().all(|c| c.status == Status::Pass);
    Document::new(
        "verify cocycles",
        Status::from_bool(ok),
        cfg.echo(Some(xdeg)),
        Body::Cocycles(CocycleBody { cocycles }),
    )
}

fn random_field(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> VectorField {
    let terms = rng.random_range(1..=3);
    let mut f = VectorField::new(symdef_core::Symbol::zero(dim)).expect("zero is a field");
    for _ in 0..terms {
        let deg = rng.random_range(0..=max_deg);
        let mut exps = vec![0u32; dim];
        for _ in 0..deg {
            exps[rng.random_range(0..dim)] += 1;
        }
        let c = Rational::from(rng.random_range(1..=3i64) * if rng.random_bool(0.5) { 1 } else { -1 });
        f = f.add(&VectorField::monomial(&exps, rng.random_range(1..=dim)).scale(&c));
    }
    f
}

fn random_symbol(rng: &mut ChaCha8Rng, dim: usize, max_x: u32, max_grade: u32) -> Polynomial {
    let mut x = vec![0u32; dim];
    let mut xi = vec![0u32; dim];
    for _ in 0..rng.random_range(0..=max_x) {
        x[rng.random_range(0..dim)] += 1;
    }
    for _ in 0..rng.random_range(0..=max_grade) {
        xi[rng.random_range(0..dim)] += 1;
    }
    Polynomial::term(Rational::ONE, xxi_monomial(&x, &xi))
}

pub fn cup_table(cfg: &RunConfig) -> Document {
    let xdeg = cfg.xdeg.unwrap_or(CUP_XDEG);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    let mut ok = true;
    for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
        let class = cup_class(i, j, cfg.dim).expect("standard cocycles share a dimension");
        let w = cup(&standard_cocycle(i), &standard_cocycle(j));
        let samples = (0..CUP_SAMPLES)
            .map(|_| {
                let x = random_field(&mut rng, cfg.dim, xdeg);
                let y = random_field(&mut rng, cfg.dim, xdeg);
                let p = random_symbol(&mut rng, cfg.dim, 3, cfg.grades as u32);
                let value = w.eval(&x, &y).expect("same dimension").apply(&p);
                WitnessJson {
                    x: x.to_string(),
                    y: Some(y.to_string()),
                    p: p.to_string(),
                    value: value.to_string(),
                }
            })
            .collect();
        let (name, witness, primitive) = match &class {
            CupClass::Zero => ("zero", None, BTreeMap::new()),
            CupClass::Coboundary(prim) => {
                let wit = symdef_core::cochain::cochain2_is_zero(&w, cfg.dim, None)
                    .expect("same dimension")
                    .err()
                    .map(|w| WitnessJson::from(&w));
                let prim = prim.terms().iter().map(|(d, c)| (d.to_string(), c.to_string())).collect();
                ("coboundary", wit, prim)
            }
            CupClass::Essential(wit) => ("essential", Some(WitnessJson::from(wit)), BTreeMap::new()),
        };
        // The vanishing of the low cups and the absence of essential
        // classes are the checked claims.
        if (i == 0 && j <= 1 && class != CupClass::Zero) || name == "essential" {
            ok = false;
        }
        records.push(CupRecord {
            left: format!("c{i}"),
            right: format!("c{j}"),
            is_zero: class == CupClass::Zero,
            witness,
            class: name,
            primitive,
            samples,
        });
    }
    Document::new("cup table", Status::from_bool(ok), cfg.echo(Some(xdeg)), Body::Cup(CupBody { records }))
}

fn verdict(reference: &RelationIdeal, c: &IdealComparison) -> ReferenceVerdict {
    ReferenceVerdict {
        reference: IdealJson::from(reference),
        verdict: VerdictJson::from(c),
    }
}

pub fn mc_solve(cfg: &RunConfig) -> Result<Document, String> {
    let config = core_config(cfg)?;
    let auto = slice_degree(cfg.order);
    let xdeg = cfg.xdeg.unwrap_or(auto);
    if xdeg < auto {
        return Err(format!("--xdeg must be at least {auto} at order {}", cfg.order));
    }
    let summary = match run_pipeline(&config, cfg.order) {
        Ok(s) => s,
        Err(e @ Error::AnsatzInsufficient { .. }) => {
            let empty = RelationIdeal::zero();
            let none = VerdictJson::from(&IdealComparison::Equal);
            let body = McBody {
                reports: Vec::new(),
                ideal: IdealJson::from(&empty),
                interior_ideal: IdealJson::from(&empty),
                verdicts: McVerdicts {
                    integrability: ReferenceVerdict {
                        reference: IdealJson::from(&empty),
                        verdict: VerdictJson { verdict: "not-computed", ..none.clone() },
                    },
                    density: ReferenceVerdict {
                        reference: IdealJson::from(&empty),
                        verdict: VerdictJson { verdict: "not-computed", ..none },
                    },
                },
                extended_certificates: Vec::new(),
                error: Some(ErrorJson {
                    kind: "ansatz-insufficient",
                    message: e.to_string(),
                }),
            };
            return Ok(Document::new("mc solve", Status::Fail, cfg.echo(Some(xdeg)), Body::Mc(Box::new(body))));
        }
        Err(e) => return Err(e.to_string()),
    };
    let reports: Vec<ObstructionJson> = summary
        .reports
        .iter()
        .map(|r| ObstructionJson {
            order: r.order,
            grade: r.grade,
            window_truncated: r.window_truncated,
            relations: r.relations.iter().map(|p| p.to_string()).collect(),
            coefficients: r.coefficients.iter().map(|(d, c)| (d.to_string(), c.to_string())).collect(),
            certificate: CertificateJson {
                tests_run: r.certificate.tests_run,
                all_zero: r.certificate.all_zero,
            },
        })
        .collect();
    let mut extended = Vec::new();
    if xdeg > auto {
        for m in 2..=cfg.order {
            let certs = verify_order_on(&summary.state, m, xdeg).map_err(|e| e.to_string())?;
            extended.push(ExtendedCertificate {
                order: m,
                xdeg,
                tests_run: certs.iter().map(|c| c.tests_run).sum(),
                all_zero: certs.iter().all(|c| c.all_zero),
            });
        }
    }
    let ok = reports.iter().all(|r| r.certificate.all_zero) && extended.iter().all(|c| c.all_zero);
    let body = McBody {
        reports,
        ideal: IdealJson::from(summary.state.ideal()),
        interior_ideal: IdealJson::from(&summary.interior),
        verdicts: McVerdicts {
            integrability: verdict(&summary.integrability, &summary.vs_integrability),
            density: verdict(&summary.density, &summary.vs_density),
        },
        extended_certificates: extended,
        error: None,
    };
    Ok(Document::new("mc solve", Status::from_bool(ok), cfg.echo(Some(xdeg)), Body::Mc(Box::new(body))))
}

fn tau_monomial(e: &[u32; 3]) -> String {
    let mut p = Polynomial::one();
    for (i, k) in e.iter().enumerate() {
        p = &p * &Polynomial::var(VarId::tau(i)).pow(*k);
    }
    p.to_string()
}

pub fn weyl_tau(cfg: &RunConfig) -> Document {
    let xdeg = cfg.xdeg.unwrap_or(WEYL_XDEG);
    let r = tau_report(cfg.dim, xdeg);
    let residues = r
        .residues
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("tau{i}"), v.iter().map(|p| p.to_string()).collect()))
        .collect();
    let independence: Vec<IndependenceJson> = [(Setting::Generic, "generic"), (Setting::Diagonal, "diagonal")]
        .into_iter()
        .map(|(setting, name)| {
            let v = monomial_independence_check(INDEPENDENCE_SHIFT, cfg.dim, xdeg, setting);
            IndependenceJson {
                setting: name,
                max_shift: v.max_shift,
                holds: v.holds(),
                monomials: v
                    .monomials
                    .iter()
                    .map(|(m, es)| (m.to_string(), es.iter().map(tau_monomial).collect()))
                    .collect(),
                undecomposable: v.undecomposable.as_ref().map(|(m, key, rem)| UndecomposableJson {
                    shift: *m,
                    operator_key: key.to_string(),
                    remainder: rem.to_string(),
                }),
                pairs_checked: v.pairs_checked,
            }
        })
        .collect();
    let ok = r.residue_zero() && independence.iter().all(|v| v.holds);
    let body = WeylBody {
        tau0: r.tau[0].to_string(),
        tau1: r.tau[1].to_string(),
        tau2: r.tau[2].to_string(),
        residue_zero: r.residue_zero(),
        residues,
        independence,
    };
    Document::new("weyl tau", Status::from_bool(ok), cfg.echo(Some(xdeg)), Body::Weyl(body))
}

fn check(name: &'static str, cases: usize, witnesses: Vec<WitnessJson>) -> CheckJson {
    CheckJson {
        name,
        status: Status::from_bool(witnesses.is_empty()),
        cases,
        witnesses,
    }
}

fn witness(x: &VectorField, y: Option<&VectorField>, p: &Polynomial, value: &Polynomial) -> WitnessJson {
    WitnessJson {
        x: x.to_string(),
        y: y.map(|y| y.to_string()),
        p: p.to_string(),
        value: value.to_string(),
    }
}

pub fn dlm_check(cfg: &RunConfig) -> Document {
    let xdeg = cfg.xdeg.unwrap_or(DLM_XDEG);
    let fields = test_fields(cfg.dim, xdeg);
    let sym_deg = xdeg + 1;
    let symbols: Vec<Polynomial> = (0..=sym_deg)
        .flat_map(|a| (0..=sym_deg - a).flat_map(move |g| monomial_symbols(cfg.dim, a, g)))
        .collect();

    let (mut series_cases, mut series_bad) = (0, Vec::new());
    let (mut filt_cases, mut filt_bad) = (0, Vec::new());
    for x in fields.iter() {
        let op = dlm_operator(x);
        for p in symbols.iter() {
            let by_op = op.apply(p);
            let by_comp = dlm_action(x, p);
            series_cases += 1;
            if by_op != by_comp && series_bad.is_empty() {
                series_bad.push(witness(x, None, p, &(&by_op - &by_comp)));
            }
            let r = p.terms().map(|(m, _)| m.xi_degree()).max().unwrap_or(0);
            filt_cases += 1;
            if by_comp.terms().any(|(m, _)| m.xi_degree() > r) && filt_bad.is_empty() {
                filt_bad.push(witness(x, None, p, &by_comp));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut action_bad = Vec::new();
    for _ in 0..DLM_SAMPLES {
        let x = random_field(&mut rng, cfg.dim, xdeg.min(3));
        let y = random_field(&mut rng, cfg.dim, xdeg.min(3));
        let p = random_symbol(&mut rng, cfg.dim, 3, 3);
        let xy = x.bracket(&y).expect("same dimension");
        let lhs = dlm_action(&xy, &p);
        let rhs = &dlm_action(&x, &dlm_action(&y, &p)) - &dlm_action(&y, &dlm_action(&x, &p));
        if lhs != rhs && action_bad.is_empty() {
            action_bad.push(witness(&x, Some(&y), &p, &(&lhs - &rhs)));
        }
    }
    let checks = vec![
        check("explicit-series", series_cases, series_bad),
        check("action", DLM_SAMPLES, action_bad),
        check("filtration", filt_cases, filt_bad),
    ];
    let ok = checks.iter().all(|c| c.status == Status::Pass);
    Document::new("dlm check", Status::from_bool(ok), cfg.echo(Some(xdeg)), Body::Dlm(DlmBody { checks }))
}

fn word_name(word: &[usize]) -> String {
    word.iter().map(|i| format!("tau{i}")).collect::<Vec<_>>().join("*")
}

pub fn ideal_compare(cfg: &RunConfig) -> Document {
    let config = match core_config(cfg) {
        Ok(c) => c,
        Err(_) => unreachable!("validated configuration"),
    };
    let integ = RelationIdeal::new(interior_instances(
        &[RelationFamily::Quadratic, RelationFamily::CubicOne, RelationFamily::CubicTwo],
        &config,
    ));
    let dens = RelationIdeal::new(interior_instances(
        &[RelationFamily::Quadratic, RelationFamily::DensityOne, RelationFamily::DensityTwo],
        &config,
    ));
    let cmp = compare(&integ, &dens);
    let subs = substitution_relations(&config);
    let sub_ideal = RelationIdeal::new(
        subs.iter()
            .filter(|r| !r.window_truncated)
            .map(|r| r.relation.clone())
            .collect(),
    );
    let sub_cmp = compare(&sub_ideal, &dens);
    let ok = matches!(cmp, IdealComparison::StrictlyContained { .. }) && sub_cmp == IdealComparison::Equal;
    let body = IdealBody {
        integrability: IdealJson::from(&integ),
        density: IdealJson::from(&dens),
        comparison: VerdictJson::from(&cmp),
        substitution: SubstitutionBody {
            relations: subs
                .iter()
                .map(|r| SubstitutionJson {
                    grade: r.grade,
                    word: word_name(&r.word),
                    relation: r.relation.to_string(),
                    window_truncated: r.window_truncated,
                })
                .collect(),
            ideal: IdealJson::from(&sub_ideal),
            verdict: VerdictJson::from(&sub_cmp),
        },
    };
    Document::new("ideal compare", Status::from_bool(ok), cfg.echo(cfg.xdeg), Body::Ideal(Box::new(body)))
}
