// Range guards are written `!(lo < hi)` on purpose: the negation also
// rejects NaN, which the direct comparison would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `pst` — Phase Stretch Transform feature detection from the command line.

mod commands;
mod params;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// CLI failure split by exit code: usage errors exit 2, compute/I/O
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "pst",
    version,
    about = "Phase Stretch Transform feature detection",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a detector over an image or 1D signal.
    Transform(commands::TransformArgs),
    /// Compare the numerical transform against the closed-form small-phase
    /// model.
    CompareOracle(commands::CompareOracleArgs),
    /// Sweep step contrasts at fixed brightness and report per-edge peaks.
    SweepContrast(commands::SweepContrastArgs),
    /// Combine PST and derivative responses into the hybrid detector.
    Hybrid(commands::HybridArgs),
    /// Generate synthetic inputs with ground truth.
    Synth {
        #[command(flatten)]
        args: commands::SynthArgs,
        /// JSON report output.
        #[arg(long, global = true)]
        report: Option<PathBuf>,
    },
    /// Extract one image row as a 1D signal.
    LineScan(commands::LineScanArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Transform(args) => commands::run_transform(args),
        Command::CompareOracle(args) => commands::run_compare_oracle(args),
        Command::SweepContrast(args) => commands::run_sweep_contrast(args),
        Command::Hybrid(args) => commands::run_hybrid(args),
        Command::Synth { args, report } => commands::run_synth(args, report.as_deref()),
        Command::LineScan(args) => commands::run_line_scan(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
