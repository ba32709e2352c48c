//! Report documents. Field order is fixed and maps are sorted, so two runs
//! of one configuration render identically apart from `timing`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use symdef_core::cochain::Witness;
use symdef_core::ideal::{IdealComparison, RelationIdeal};

pub const SCHEMA: &str = "symdef-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn word(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub dim: usize,
    pub grades: usize,
    pub order: usize,
    pub families: Vec<String>,
    /// Field-degree bound in effect; absent for commands without one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xdeg: Option<u32>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub command: &'static str,
    pub status: Status,
    pub config: ConfigEcho,
    #[serde(flatten)]
    pub body: Body,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Document {
    pub fn new(command: &'static str, status: Status, config: ConfigEcho, body: Body) -> Self {
        Document {
            schema: SCHEMA,
            command,
            status,
            config,
            body,
            timing: None,
        }
    }

    pub fn timed(mut self, d: Duration) -> Self {
        self.timing = Some(Timing {
            elapsed_ms: d.as_millis() as u64,
        });
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.text(),
        }
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "symdef {}: {}", self.command, self.status.word().to_uppercase());
        let _ = writeln!(
            s,
            "  dim={} grades={} order={} families={} xdeg={} seed={}",
            c.dim,
            c.grades,
            c.order,
            c.families.join(","),
            c.xdeg.map_or("-".to_string(), |x| x.to_string()),
            c.seed
        );
        self.body.text(&mut s);
        if let Some(t) = &self.timing {
            let _ = writeln!(s, "  elapsed {} ms", t.elapsed_ms);
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Body {
    Cocycles(CocycleBody),
    Cup(CupBody),
    Mc(Box<McBody>),
    Weyl(WeylBody),
    Dlm(DlmBody),
    Ideal(Box<IdealBody>),
}

impl Body {
    fn text(&self, s: &mut String) {
        match self {
            Body::Cocycles(b) => {
                for r in &b.cocycles {
                    let _ = writeln!(s, "  {}: {} ({} pairs)", r.cocycle, r.status.word(), r.pairs_checked);
                    witness_lines(s, &r.witnesses);
                }
            }
            Body::Cup(b) => {
                for r in &b.records {
                    let _ = writeln!(s, "  [[{},{}]]: {}", r.left, r.right, r.class);
                    for (d, c) in &r.primitive {
                        let _ = writeln!(s, "      primitive {d}: {c}");
                    }
                }
            }
            Body::Mc(b) => {
                for r in b.reports.iter().filter(|r| !r.relations.is_empty()) {
                    let edge = if r.window_truncated { " (window-truncated)" } else { "" };
                    let _ = writeln!(s, "  order {} grade {}{}:", r.order, r.grade, edge);
                    for p in &r.relations {
                        let _ = writeln!(s, "      {p}");
                    }
                }
                let bad = b.reports.iter().filter(|r| !r.certificate.all_zero).count();
                let _ = writeln!(s, "  certificates failing: {bad}");
                if let Some(e) = &b.error {
                    let _ = writeln!(s, "  error: {} ({})", e.kind, e.message);
                }
                let _ = writeln!(s, "  ideal basis: {} polynomials", b.ideal.groebner_basis.len());
                let _ = writeln!(s, "  vs integrability ideal: {}", b.verdicts.integrability.verdict.verdict);
                let _ = writeln!(s, "  vs density ideal: {}", b.verdicts.density.verdict.verdict);
            }
            Body::Weyl(b) => {
                let _ = writeln!(s, "  tau0 = {}", b.tau0);
                let _ = writeln!(s, "  tau1 = {}", b.tau1);
                let _ = writeln!(s, "  tau2 = {}", b.tau2);
                let _ = writeln!(s, "  residue_zero = {}", b.residue_zero);
                for (k, r) in &b.residues {
                    let _ = writeln!(s, "  residue {k}: {}", r.join("; "));
                }
                for v in &b.independence {
                    let _ = writeln!(s, "  independence ({}, shift <= {}): {}", v.setting, v.max_shift, v.holds);
                }
            }
            Body::Dlm(b) => {
                for c in &b.checks {
                    let _ = writeln!(s, "  {}: {} ({} cases)", c.name, c.status.word(), c.cases);
                    witness_lines(s, &c.witnesses);
                }
            }
            Body::Ideal(b) => {
                let _ = writeln!(s, "  integrability vs density: {}", b.comparison.verdict);
                if let Some(w) = &b.comparison.witness {
                    let _ = writeln!(s, "      witness {w}");
                }
                let _ = writeln!(s, "  substitution vs density: {}", b.substitution.verdict.verdict);
            }
        }
    }
}

fn witness_lines(s: &mut String, ws: &[WitnessJson]) {
    for w in ws {
        let y = w.y.as_deref().unwrap_or("-");
        let _ = writeln!(s, "      X={} Y={} P={} value={}", w.x, y, w.p, w.value);
    }
}

/// A failing evaluation in canonical text syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessJson {
    pub x: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    pub p: String,
    pub value: String,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        WitnessJson {
            x: w.x.to_string(),
            y: w.y.as_ref().map(|y| y.to_string()),
            p: w.p.to_string(),
            value: w.value.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleBody {
    pub cocycles: Vec<CocycleResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleResult {
    pub cocycle: String,
    pub status: Status,
    pub pairs_checked: usize,
    pub witnesses: Vec<WitnessJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CupBody {
    pub records: Vec<CupRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CupRecord {
    pub left: String,
    pub right: String,
    pub is_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    /// `zero`, `coboundary` or `essential`.
    pub class: &'static str,
    /// Invariant primitive when the class is `coboundary`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub primitive: BTreeMap<String, String>,
    /// Values on seeded random triples.
    pub samples: Vec<WitnessJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateJson {
    pub tests_run: usize,
    pub all_zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionJson {
    pub order: usize,
    pub grade: usize,
    pub window_truncated: bool,
    pub relations: Vec<String>,
    pub coefficients: BTreeMap<String, String>,
    pub certificate: CertificateJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealJson {
    pub variables: Vec<String>,
    pub generators: Vec<String>,
    pub groebner_basis: Vec<String>,
    pub order: &'static str,
}

impl From<&RelationIdeal> for IdealJson {
    fn from(i: &RelationIdeal) -> Self {
        IdealJson {
            variables: i.variables().iter().map(|v| v.to_string()).collect(),
            generators: i.generators().iter().map(|p| p.to_string()).collect(),
            groebner_basis: i.basis().iter().map(|p| p.to_string()).collect(),
            order: "grlex",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictJson {
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub only_in_first: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub only_in_second: Vec<String>,
}

impl From<&IdealComparison> for VerdictJson {
    fn from(c: &IdealComparison) -> Self {
        let mut v = VerdictJson {
            verdict: c.name(),
            witness: None,
            only_in_first: Vec::new(),
            only_in_second: Vec::new(),
        };
        match c {
            IdealComparison::Equal => {}
            IdealComparison::StrictlyContained { witness } | IdealComparison::StrictlyContains { witness } => {
                v.witness = Some(witness.to_string());
            }
            IdealComparison::Incomparable {
                only_in_first,
                only_in_second,
            } => {
                v.only_in_first = vec![only_in_first.to_string()];
                v.only_in_second = vec![only_in_second.to_string()];
            }
        }
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceVerdict {
    pub reference: IdealJson,
    #[serde(flatten)]
    pub verdict: VerdictJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct McVerdicts {
    /// Interior relations against the integrability conditions.
    pub integrability: ReferenceVerdict,
    /// Interior relations against the density-module relations.
    pub density: ReferenceVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorJson {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct McBody {
    pub reports: Vec<ObstructionJson>,
    /// Ideal of every relation found, window edges included.
    pub ideal: IdealJson,
    /// Ideal of the relations at window-interior grades.
    pub interior_ideal: IdealJson,
    pub verdicts: McVerdicts,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extended_certificates: Vec<ExtendedCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorJson>,
}

/// Re-verification of one order on a wider test set.
#[derive(Clone, Debug, Serialize)]
pub struct ExtendedCertificate {
    pub order: usize,
    pub xdeg: u32,
    pub tests_run: usize,
    pub all_zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceJson {
    pub setting: &'static str,
    pub max_shift: u32,
    pub holds: bool,
    pub monomials: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undecomposable: Option<UndecomposableJson>,
    pub pairs_checked: usize,
}

/// Part of a shift piece with no expansion in the τ-monomials.
#[derive(Clone, Debug, Serialize)]
pub struct UndecomposableJson {
    pub shift: u32,
    pub operator_key: String,
    pub remainder: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylBody {
    pub tau0: String,
    pub tau1: String,
    pub tau2: String,
    pub residue_zero: bool,
    pub residues: BTreeMap<String, Vec<String>>,
    pub independence: Vec<IndependenceJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckJson {
    pub name: &'static str,
    pub status: Status,
    pub cases: usize,
    pub witnesses: Vec<WitnessJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DlmBody {
    pub checks: Vec<CheckJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubstitutionJson {
    pub grade: usize,
    pub word: String,
    pub relation: String,
    pub window_truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubstitutionBody {
    pub relations: Vec<SubstitutionJson>,
    pub ideal: IdealJson,
    /// Interior substitution relations against the density ideal.
    pub verdict: VerdictJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealBody {
    pub integrability: IdealJson,
    pub density: IdealJson,
    /// Integrability ideal (first) against the density ideal (second).
    pub comparison: VerdictJson,
    pub substitution: SubstitutionBody,
}
