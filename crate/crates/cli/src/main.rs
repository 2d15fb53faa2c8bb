//! `findist` command-line front end.
//!
//! Exit codes: 0 when the command succeeds (or the audited object passes),
//! 1 when a verdict fails, 2 on invalid input.

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod audit;
mod config;
mod exponents;
mod meshgen;
mod output;
mod run;
mod study;

#[derive(Debug, Parser)]
#[command(name = "findist", version, about = "Distortion-constrained hyperelastic minimization and audits")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the exact exponent relations for the given parameters.
    Exponents(exponents::ExponentArgs),
    /// Check a deformation against an admissible class.
    Audit(audit::AuditArgs),
    /// Minimize a stored energy over an admissible class.
    Minimize(run::MinimizeArgs),
    /// Distortion norms of the model sequences.
    Sequence(study::SequenceArgs),
    /// Convergence of Jacobian integrals along the model sequences.
    WeakMinors(study::WeakMinorArgs),
    /// Write grid meshes and test fixtures.
    MeshGen(meshgen::MeshGenArgs),
}

/// Configures the global rayon pool; `None` keeps the default.
pub(crate) fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        anyhow::ensure!(n >= 1, "thread count must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot configure worker threads")?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    if !matches!(cli.command, Command::Minimize(_)) {
        init_threads(cli.threads)?;
    }
    match &cli.command {
        Command::Exponents(a) => exponents::run(a),
        Command::Audit(a) => audit::run(a),
        Command::Minimize(a) => run::run(a, cli.threads),
        Command::Sequence(a) => study::run_sequence(a),
        Command::WeakMinors(a) => study::run_weak_minors(a),
        Command::MeshGen(a) => meshgen::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
