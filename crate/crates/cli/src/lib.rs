//! Batch runner for the symdef engine: argument grammar, commands and
//! report documents.

mod commands;
pub mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{ConfigEcho, Document, Format};

/// Exit code for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code for a run with a failed check.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for a malformed invocation or unusable output path.
pub const EXIT_USAGE: i32 = 2;

/// Highest supported order; order 4 is exploratory.
pub const MAX_ORDER: usize = 4;

#[derive(Parser, Debug)]
#[command(name = "symdef", version, about = "Exact deformations of the module of symbols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cocycle checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Cup products of the standard cocycles.
    #[command(subcommand)]
    Cup(CupCmd),
    /// Maurer-Cartan solving.
    #[command(subcommand)]
    Mc(McCmd),
    /// Weyl-symbol parameters of the density modules.
    #[command(subcommand)]
    Weyl(WeylCmd),
    /// Checks on the density-module action.
    #[command(subcommand)]
    Dlm(DlmCmd),
    /// Relation ideal comparisons.
    #[command(subcommand)]
    Ideal(IdealCmd),
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// δc_i = 0 on monomial field pairs.
    Cocycles,
}

#[derive(Subcommand, Debug)]
enum CupCmd {
    /// Classify every ⟦c_i, c_j⟧.
    Table,
}

#[derive(Subcommand, Debug)]
enum McCmd {
    /// Solve order by order and compare the relation ideal.
    Solve,
}

#[derive(Subcommand, Debug)]
enum WeylCmd {
    /// Extract τ_0, τ_1, τ_2 and test monomial independence.
    Tau,
}

#[derive(Subcommand, Debug)]
enum DlmCmd {
    /// Explicit series, action property and filtration.
    Check,
}

#[derive(Subcommand, Debug)]
enum IdealCmd {
    /// Integrability ideal against the density-module ideal.
    Compare,
}

#[derive(Args, Debug)]
struct Options {
    /// Dimension n.
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
    /// Grade window K.
    #[arg(long, global = true, default_value_t = 8)]
    grades: usize,
    /// Highest Maurer-Cartan order.
    #[arg(long, global = true, default_value_t = 3)]
    order: usize,
    /// Enabled parameter families, comma separated.
    #[arg(long, global = true, default_value = "t0,t1,t2")]
    families: String,
    /// Vector-field degree bound; the default depends on the command.
    #[arg(long, global = true)]
    xdeg: Option<u32>,
    /// Seed of the randomized samples.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub dim: usize,
    pub grades: usize,
    pub order: usize,
    pub families: [bool; 3],
    pub xdeg: Option<u32>,
    pub seed: u64,
}

impl RunConfig {
    fn echo(&self, xdeg: Option<u32>) -> ConfigEcho {
        ConfigEcho {
            dim: self.dim,
            grades: self.grades,
            order: self.order,
            families: ["t0", "t1", "t2"]
                .iter()
                .zip(self.families)
                .filter(|(_, on)| *on)
                .map(|(n, _)| n.to_string())
                .collect(),
            xdeg,
            seed: self.seed,
        }
    }
}

/// What a run produced: the exit code and the rendered report (or the
/// usage message).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

fn parse_families(s: &str) -> Result<[bool; 3], String> {
    let mut out = [false; 3];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "t0" => out[0] = true,
            "t1" => out[1] = true,
            "t2" => out[2] = true,
            other => return Err(format!("unknown parameter family `{other}` (expected t0, t1, t2)")),
        }
    }
    if out == [false; 3] {
        return Err("at least one parameter family must be enabled".into());
    }
    Ok(out)
}

fn validate(o: &Options) -> Result<RunConfig, String> {
    if o.dim == 0 {
        return Err("--dim must be at least 1".into());
    }
    if o.grades < 2 {
        return Err("--grades must be at least 2".into());
    }
    if !(2..=MAX_ORDER).contains(&o.order) {
        return Err(format!("--order must lie in 2..={MAX_ORDER}"));
    }
    Ok(RunConfig {
        dim: o.dim,
        grades: o.grades,
        order: o.order,
        families: parse_families(&o.families)?,
        xdeg: o.xdeg,
        seed: o.seed,
    })
}

fn usage(msg: impl Into<String>) -> Outcome {
    Outcome {
        code: EXIT_USAGE,
        output: msg.into(),
    }
}

/// Parses `argv` (program name first), runs the command and writes the
/// report to `--out` when given. The returned output is the report itself.
pub fn execute<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            return Outcome {
                code,
                output: e.render().to_string(),
            };
        }
    };
    let cfg = match validate(&cli.opts) {
        Ok(c) => c,
        Err(m) => return usage(format!("error: {m}\n")),
    };
    let format = match cli.opts.format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    let start = Instant::now();
    let doc: Document = match cli.command {
        Command::Verify(VerifyCmd::Cocycles) => commands::verify_cocycles(&cfg),
        Command::Cup(CupCmd::Table) => commands::cup_table(&cfg),
        Command::Mc(McCmd::Solve) => match commands::mc_solve(&cfg) {
            Ok(d) => d,
            Err(m) => return usage(format!("error: {m}\n")),
        },
        Command::Weyl(WeylCmd::Tau) => commands::weyl_tau(&cfg),
        Command::Dlm(DlmCmd::Check) => commands::dlm_check(&cfg),
        Command::Ideal(IdealCmd::Compare) => commands::ideal_compare(&cfg),
    }
    .timed(start.elapsed());
    let code = if doc.passed() { EXIT_PASS } else { EXIT_FAIL };
    let output = doc.render(format);
    if let Some(path) = cli.opts.out.as_ref() {
        if let Err(e) = std::fs::write(path, &output) {
            return usage(format!("error: cannot write {}: {e}\n", path.display()));
        }
    }
    Outcome { code, output }
}
