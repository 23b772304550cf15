//! `glom`: analyse coupled-gyrostat models from the command line.
//!
//! Every command writes a JSON report to standard output (or `--out`) and a
//! short table to standard error. Exit codes: 0 success, 1 validation or
//! analysis failure, 2 usage error.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl From<glom_core::Error> for CliError {
    fn from(e: glom_core::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "glom",
    version,
    about = "Invariants, Jacobi identity and Casimirs of coupled-gyrostat models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the table on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Seed for random parameter points and initial states.
    #[arg(long, global = true, env = "GLOM_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
pub struct ModelArg {
    /// JSON model file, or a built-in name such as `model2` or `sparse(3)`.
    pub model: String,
    /// Parameters to set to zero before analysis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub zero: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a model and its energy constraint.
    Check(ModelArg),
    /// Count and reconstruct quadratic invariants.
    Invariants {
        #[command(flatten)]
        model: ModelArg,
        /// Zero/nonzero pattern over `--vary`, leftmost first; `0` zeroes.
        #[arg(long, requires = "vary")]
        subclass: Option<String>,
        #[arg(long, value_delimiter = ',')]
        vary: Vec<String>,
    },
    /// Per-triple Jacobi residuals of the Poisson matrix.
    Jacobi(ModelArg),
    /// Nullspace of the Poisson matrix and quadratic Casimirs.
    Casimirs(ModelArg),
    /// Invariant counts for every zero/nonzero pattern of some parameters.
    Enumerate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', required = true)]
        vary: Vec<String>,
    },
    /// Members, incremental Jacobi conditions and Casimirs of a hierarchy.
    Hierarchy {
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Final)]
        schedule: ScheduleArg,
        /// Drop the built-in constraint set.
        #[arg(long)]
        unconstrained: bool,
    },
    /// Integrate with RK4 and report drift of conserved quantities.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 50.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// `name=value` with an exact rational value; repeatable or comma separated.
        #[arg(long = "assign", value_name = "NAME=VALUE", value_delimiter = ',')]
        assign: Vec<String>,
        /// Initial state, comma separated; random in [-1, 1] otherwise.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        state: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Track::Energy)]
        track: Track,
    },
    /// Print a model as a JSON model file.
    Export { model: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScheduleArg {
    Final,
    Cumulative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Track {
    Energy,
    Casimirs,
    All,
}

/// A report plus its table; `ok = false` maps to exit code 1.
pub struct Outcome {
    pub report: Value,
    pub table: Vec<String>,
    pub ok: bool,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Check(m) => commands::check(m),
        Command::Invariants {
            model,
            subclass,
            vary,
        } => commands::invariants(model, subclass.as_deref(), vary, seed),
        Command::Jacobi(m) => commands::jacobi(m),
        Command::Casimirs(m) => commands::casimirs(m, seed),
        Command::Enumerate { model, vary } => commands::enumerate(model, vary, seed),
        Command::Hierarchy {
            family,
            k,
            schedule,
            unconstrained,
        } => commands::hierarchy(family, *k, *schedule, *unconstrained, seed),
        Command::Simulate {
            model,
            t,
            dt,
            assign,
            state,
            track,
        } => commands::simulate(model, *t, *dt, assign, state, *track, seed),
        Command::Export { model } => commands::export(model),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("values serialize");
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if !cli.quiet {
        let mut err = std::io::stderr().lock();
        for line in &outcome.table {
            writeln!(err, "{line}")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli, &outcome) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if outcome.ok { 0 } else { 1 })
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
