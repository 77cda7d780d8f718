//! `qsl`: shortcut circuits, optical gate simulation, tomography and reports.
//!
//! Exit codes: 0 success, 1 verification or balancing failure, 2 input error.

mod anchors;
mod circuits;
mod optics;
mod output;
mod report;
mod specs;
mod tomo;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qsl", version, about = "Qudit shortcut circuits, heralded optics and tomography")]
struct Cli {
    /// Seed for every stochastic step. Required whenever sampling happens.
    #[arg(long, global = true, env = "QSL_SEED")]
    seed: Option<u64>,
    /// Output directory (circuits, optics, report) or file (tomo).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a shortcut circuit, write it with its cost, optionally verify it.
    Circuits(circuits::Args),
    /// Simulate an optical layout and sample count records.
    Optics(optics::Args),
    /// Reconstruct a state, process or truth table from count records.
    Tomo(tomo::Args),
    /// Collect tomography reports into summary tables.
    Report(report::Args),
}

pub enum Outcome {
    Success,
    VerificationFailed,
}

pub struct Globals {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Globals {
    pub fn seed_for(&self, what: &str) -> anyhow::Result<u64> {
        self.seed
            .ok_or_else(|| anyhow::anyhow!("{what} needs a seed: pass --seed or set QSL_SEED"))
    }

    pub fn out(&self) -> anyhow::Result<&PathBuf> {
        self.out.as_ref().ok_or_else(|| anyhow::anyhow!("--out is required"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = Globals { seed: cli.seed, out: cli.out };
    let result = match cli.command {
        Command::Circuits(a) => circuits::run(&a, &globals),
        Command::Optics(a) => optics::run(&a, &globals),
        Command::Tomo(a) => tomo::run(&a, &globals),
        Command::Report(a) => report::run(&a, &globals),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let balancing = matches!(e.downcast_ref::<qsl_core::Error>(), Some(qsl_core::Error::BalanceFailed { .. }));
            ExitCode::from(if balancing { 1 } else { 2 })
        }
    }
}
