//! `balayage`: runs one solver or experiment from a JSON config and writes
//! a JSON report (plus CSV where the command has a table).
//!
//! Exit codes: 0 success, 2 failed characterization or invariant, 3 solver
//! did not converge, 4 configuration or input error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Context, Outcome};
use crate::report::{Output, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant failed: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] balayage_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 2,
            CliError::Core(e) if e.is_characterization() => 2,
            CliError::Core(e) if e.is_solver_failure() => 3,
            _ => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "balayage", version, about = "Pseudo-balayage and Gauss problem solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Solver tolerance (overrides the config).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Print one line per invariant check.
    #[arg(long, global = true)]
    summary: bool,
}

#[derive(Subcommand, Clone)]
enum Command {
    Balayage,
    Gauss,
    Capacity,
    Solvability,
    ConvergeUp,
    ConvergeDown,
    Thinness,
    /// Oracle comparisons plus the invariant suite on a fixture directory.
    Verify {
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BALAYAGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("BALAYAGE_THREADS: not a thread count: {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("BALAYAGE_THREADS: {e}")))
}

fn run_verify(cli: &Cli, fixtures: Option<PathBuf>) -> Result<(), CliError> {
    let dir = fixtures.unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let output = verify::run(&dir, cli.tol)?;
    let out = Output::new(&cli.out)?;
    let checks: Vec<_> = output.all_checks().cloned().collect();
    let tol = cli.tol.unwrap_or(balayage_core::tolerances::SOLVER_KKT);
    let report = Report::new("verify", "", tol, &output, checks);
    out.write_report("verify", &report)?;
    if cli.summary {
        for f in &output.fixtures {
            for c in &f.checks {
                println!("{}: {}", f.fixture, c.summary_line());
            }
        }
    }
    println!(
        "verify: {} oracle checks, {} fixtures",
        output.oracle_checks.len(),
        output.fixtures.len()
    );
    if let Some(bad) = output.oracle_checks.iter().find(|c| !c.passed) {
        return Err(CliError::Invariant(bad.summary_line()));
    }
    for f in &output.fixtures {
        if let Some(bad) = f.checks.iter().find(|c| !c.passed) {
            return Err(CliError::Invariant(format!("{}: {}", f.fixture, bad.summary_line())));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    if let Command::Verify { fixtures } = &cli.command {
        return run_verify(cli, fixtures.clone());
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let loaded = config::load(path)?;
    let out = Output::new(&cli.out)?;
    let ctx = Context {
        tol: loaded.tol(cli.tol),
        loaded: &loaded,
        out: &out,
    };
    let Outcome { summary, checks } = match &cli.command {
        Command::Balayage => commands::balayage(&ctx)?,
        Command::Gauss => commands::gauss(&ctx)?,
        Command::Capacity => commands::capacity(&ctx)?,
        Command::Solvability => commands::solvability(&ctx)?,
        Command::ConvergeUp => commands::converge(&ctx, true)?,
        Command::ConvergeDown => commands::converge(&ctx, false)?,
        Command::Thinness => commands::thinness(&ctx)?,
        Command::Verify { .. } => unreachable!(),
    };
    println!("{summary}");
    if cli.summary {
        for c in &checks {
            println!("  {}", c.summary_line());
        }
    }
    match checks.iter().find(|c| !c.passed) {
        Some(bad) => Err(CliError::Invariant(bad.summary_line())),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("balayage: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
