//! `detkit` command line: deterministic dataset splitting, mosaic and
//! flip/shear augmentation, half-image crop suites, mAP evaluation, and
//! two-column comparison reports.
//!
//! Exit codes are a stable scripting contract: 0 on success, 2 for
//! invalid input (bad flags, bad config, malformed files, out-of-domain
//! kernel inputs), 3 for I/O failures (missing paths, codec errors).

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd_augment;
mod cmd_crop;
mod cmd_eval;
mod cmd_losscheck;
mod cmd_report;
mod cmd_split;
mod common;

#[derive(Parser)]
#[command(
    name = "detkit",
    version,
    about = "Detection-dataset engineering and evaluation toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a dataset into train/val/test manifests
    Split(cmd_split::SplitArgs),
    /// Emit mosaic composites or basic flip/shear augmentations
    Augment(cmd_augment::AugmentArgs),
    /// Cut each image into left/right/upper/lower half datasets
    CropPartial(cmd_crop::CropArgs),
    /// Score a prediction directory against a ground-truth manifest
    Eval(cmd_eval::EvalArgs),
    /// Compare several labeled prediction directories in one table
    Report(cmd_report::ReportArgs),
    /// Evaluate one loss kernel and check its gradient
    Losscheck(cmd_losscheck::LosscheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Split(args) => cmd_split::run(args),
        Command::Augment(args) => cmd_augment::run(args),
        Command::CropPartial(args) => cmd_crop::run(args),
        Command::Eval(args) => cmd_eval::run(args),
        Command::Report(args) => cmd_report::run(args),
        Command::Losscheck(args) => cmd_losscheck::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}
