//! Experiment runner for depth-based person re-identification.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{evaluate, extract, synth, transfer_apply, transfer_train, verify};
use config::{ConfigOverrides, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "depth-reid",
    about = "Depth-based person re-identification: descriptor extraction, protocol evaluation, and RGB-to-depth feature transfer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-frame descriptors (DVCov, Eigen-depth, skeleton).
    Extract(ConfigOverrides),
    /// Run a matching protocol over extracted descriptors and emit CMC data.
    Evaluate(ConfigOverrides),
    /// Fit the RGB-to-depth feature transfer model on an auxiliary set.
    TransferTrain(ConfigOverrides),
    /// Estimate depth features for RGB targets and fuse with RGB distances.
    TransferApply(ConfigOverrides),
    /// Generate synthetic datasets.
    Synth(synth::SynthArgs),
    /// Run the numerical property suites and print max deviations.
    Verify(verify::VerifyArgs),
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Extract(flags) => extract::run(&ExperimentConfig::from_flags(&flags)?),
        Command::Evaluate(flags) => evaluate::run(&ExperimentConfig::from_flags(&flags)?),
        Command::TransferTrain(flags) => {
            transfer_train::run(&ExperimentConfig::from_flags(&flags)?)
        }
        Command::TransferApply(flags) => {
            transfer_apply::run(&ExperimentConfig::from_flags(&flags)?)
        }
        Command::Synth(args) => synth::run(&args),
        Command::Verify(args) => verify::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
