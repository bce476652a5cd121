//! Command-line front end: ingest a structure document, run computations
//! and verification suites, emit deterministic reports.
//!
//! Exit codes: 0 all requested checks pass; 1 a mathematical check on the
//! input failed; 2 unreadable or invalid input; 3 internal inconsistency
//! (two independent routes disagreed).

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gradedkap::ce::CEModule;
use gradedkap::error::Error;
use gradedkap::input::{load, LoadedSpec};
use gradedkap::linfty::HomologicalVF;
use gradedkap::report::{
    atiyah_section, cohomology_section, homological_check, render_text, run_suites, spec_echo,
    tower_section, CheckResult, ConfigEcho, Report,
};

#[derive(Parser)]
#[command(
    name = "gradedkap",
    version,
    about = "Exact computations on dg manifolds built from finite-dimensional L-infinity[1] algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input document (UTF-8 JSON)
    #[arg(long, short = 'i')]
    input: PathBuf,
    /// Output format
    #[arg(long, default_value = "text", value_parser = ["json", "text"])]
    format: String,
    /// Write the report here instead of standard output
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Override the bracket-tower arity cap from the document
    #[arg(long)]
    max_arity: Option<usize>,
    /// Override the weight cap from the document
    #[arg(long)]
    weight: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify that the bracket table defines a homological vector field
    Check {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute the Atiyah cocycle of the document's connection and decide
    /// whether its class vanishes
    Atiyah {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute the bracket tower by extraction and by the curvature
    /// recursion, and report the (matching) coefficients
    Brackets {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run verification suites of exact identities
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// all, pbw, jacobi, recursion, fedosov, connections, closedform
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Chevalley-Eilenberg cohomology of a built-in module
    Cohomology {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = ["trivial", "adjoint", "coadjoint", "atiyah"])]
        module: String,
        #[arg(long, allow_hyphen_values = true)]
        degree: i64,
    },
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_)
                | Error::InvalidInput(_)
                | Error::ChartMismatch(_)
                | Error::Torsion(_)
                | Error::InsufficientCap { .. } => 2,
                Error::NotHomological { .. } => 1,
                Error::Inconsistency(_) => 3,
            }
        }
    };
    eprintln!("elapsed: {} ms", started.elapsed().as_millis());
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Check { common } => {
            let loaded = load_with_overrides(&common)?;
            let (_, check) = homological_check(&loaded)?;
            let passed = check.passed;
            let report = base_report(&loaded, "check", None, Some(check));
            emit(&common, &report)?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Atiyah { common } => {
            let loaded = load_with_overrides(&common)?;
            let (q, check) = require_homological(&loaded)?;
            let mut report = base_report(&loaded, "atiyah", None, Some(check));
            report.atiyah = Some(atiyah_section(&loaded, &q)?);
            report.passed = true;
            emit(&common, &report)?;
            Ok(0)
        }
        Command::Brackets { common } => {
            let loaded = load_with_overrides(&common)?;
            let (q, check) = require_homological(&loaded)?;
            let mut report = base_report(&loaded, "brackets", None, Some(check));
            report.tower = Some(tower_section(&loaded, &q)?);
            report.passed = true;
            emit(&common, &report)?;
            Ok(0)
        }
        Command::Verify { common, suite } => {
            let loaded = load_with_overrides(&common)?;
            let (q, check) = require_homological(&loaded)?;
            let mut report = base_report(&loaded, "verify", Some(suite.clone()), Some(check));
            report.suites = run_suites(&loaded, &q, &suite)?;
            report.passed = report
                .suites
                .iter()
                .all(|s| s.checks.iter().all(|c| c.passed));
            let passed = report.passed;
            emit(&common, &report)?;
            Ok(if passed { 0 } else { 3 })
        }
        Command::Cohomology {
            common,
            module,
            degree,
        } => {
            let loaded = load_with_overrides(&common)?;
            let module_parsed = CEModule::parse(&module)?;
            let mut report = base_report(&loaded, "cohomology", None, None);
            report.config.module = Some(module.clone());
            report.config.degree = Some(degree);
            report.cohomology = Some(cohomology_section(&loaded, module_parsed, degree)?);
            report.passed = true;
            emit(&common, &report)?;
            Ok(0)
        }
    }
}

fn load_with_overrides(common: &CommonArgs) -> Result<LoadedSpec, Error> {
    let text = std::fs::read_to_string(&common.input)
        .map_err(|e| Error::Parse(format!("{}: {e}", common.input.display())))?;
    let mut loaded = load(&text)?;
    if let Some(k) = common.max_arity {
        if k < 2 {
            return Err(Error::InvalidInput("--max-arity must be at least 2".into()));
        }
        loaded.arity_cap = k;
    }
    if let Some(w) = common.weight {
        if w == 0 {
            return Err(Error::InvalidInput("--weight must be at least 1".into()));
        }
        loaded.weight_cap = Some(w);
    }
    Ok(loaded)
}

fn require_homological(loaded: &LoadedSpec) -> Result<(HomologicalVF, CheckResult), Error> {
    let (q, check) = homological_check(loaded)?;
    match q {
        Some(q) => Ok((q, check)),
        None => Err(Error::NotHomological {
            coordinate: "see witness".into(),
            witness: check.witness.unwrap_or_default(),
        }),
    }
}

fn base_report(
    loaded: &LoadedSpec,
    command: &str,
    suite: Option<String>,
    homological: Option<CheckResult>,
) -> Report {
    let passed = homological.as_ref().map(|c| c.passed).unwrap_or(true);
    Report {
        tool: "gradedkap",
        version: env!("CARGO_PKG_VERSION"),
        spec: spec_echo(loaded),
        config: ConfigEcho {
            command: command.to_string(),
            connection: loaded.connection_kind.to_string(),
            arity_cap: loaded.arity_cap,
            weight_cap: loaded.weight_cap,
            suite,
            module: None,
            degree: None,
        },
        homological,
        atiyah: None,
        tower: None,
        cohomology: None,
        suites: Vec::new(),
        passed,
    }
}

fn emit(common: &CommonArgs, report: &Report) -> Result<(), Error> {
    let body = match common.format.as_str() {
        "json" => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Inconsistency(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
        _ => render_text(report),
    };
    match &common.output {
        None => {
            print!("{body}");
            std::io::stdout()
                .flush()
                .map_err(|e| Error::Inconsistency(e.to_string()))?;
        }
        Some(path) => {
            std::fs::write(path, body)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}
