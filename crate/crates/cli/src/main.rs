//! `dsrigid`: run the de Sitter rigidity verification suites from the
//! command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on invalid
//! input or a violated hypothesis.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{ConeArgs, InputError, Outcome};
use config::{parse_resolution, ExperimentConfig, MIN_DEGREE};

#[derive(Parser)]
#[command(name = "dsrigid", version, about = "Numerical checks for spacelike surfaces in de Sitter space")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Quadrature degrees, overriding the config.
    #[arg(long, value_name = "NTHETAxNPHI")]
    quad: Option<String>,
    /// Tolerance override; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Write the record report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify symmetric matrices against the σ₂ cone; with two matrices,
    /// print the Gårding gap.
    CheckCone {
        /// Matrix as `diag a b ...`, `identity n`, or rows `a b; c d`.
        matrices: Vec<String>,
        /// Also sweep this many random cone pairs.
        #[arg(long, default_value_t = 0)]
        random: usize,
        /// Dimensions cycled through by the random sweep.
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5, 6])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Pointwise checks on one surface.
    Geometry(Common),
    /// Integral identities and tilde symmetry for an isometric pair.
    VerifyIdentities(Common),
    /// Rigidity experiment for an isometric pair.
    Rigidity(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig, InputError> {
    let path = common.config.to_string_lossy();
    let mut cfg = ExperimentConfig::from_file(&path)?;
    if let Some(q) = &common.quad {
        let (nt, np) =
            parse_resolution(q).ok_or_else(|| InputError::Parse(format!("--quad expects NxM, got {q:?}")))?;
        if nt < MIN_DEGREE || np < MIN_DEGREE {
            return Err(InputError::Parse(format!("quadrature degrees must be >= {MIN_DEGREE}, got {q}")));
        }
        cfg.quadrature = (nt, np);
    }
    for t in &common.tol {
        let (name, value) =
            t.split_once('=').ok_or_else(|| InputError::Parse(format!("--tol expects NAME=VALUE, got {t:?}")))?;
        let value: f64 =
            value.trim().parse().map_err(|_| InputError::Parse(format!("--tol value is not a number: {t:?}")))?;
        cfg.tolerances.set(name.trim(), value)?;
    }
    Ok(cfg)
}

fn emit(outcome: &Outcome, report_path: Option<&PathBuf>) -> ExitCode {
    print!("{}", outcome.report.render_summary());
    let records = outcome.report.render_records();
    match report_path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &records) {
                eprintln!("error: cannot write report {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{records}"),
    }
    if let Some(reason) = &outcome.violation {
        eprintln!("error: {reason}");
        ExitCode::from(2)
    } else if outcome.report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, report_path) = match &cli.command {
        Cmd::CheckCone { matrices, random, dims, seed, report } => (
            commands::check_cone(&ConeArgs {
                matrices: matrices.clone(),
                random: *random,
                dims: dims.clone(),
                seed: *seed,
            }),
            report.as_ref(),
        ),
        Cmd::Geometry(c) => (load(c).and_then(|cfg| commands::geometry(&cfg)), c.report.as_ref()),
        Cmd::VerifyIdentities(c) => (load(c).and_then(|cfg| commands::verify_identities(&cfg)), c.report.as_ref()),
        Cmd::Rigidity(c) => (load(c).and_then(|cfg| commands::rigidity(&cfg)), c.report.as_ref()),
    };
    match result {
        Ok(outcome) => emit(&outcome, report_path),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
