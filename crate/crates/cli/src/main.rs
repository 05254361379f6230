//! Command-line front end for the raresieve toolkit.
//!
//! Every command is deterministic given its inputs, config, and seed:
//! outputs carry no timestamps or absolute paths, and all randomness is
//! seeded. Errors are printed to stderr with a `DATA/`, `CONFIG/`, or
//! `MODEL/` category prefix and a nonzero exit code; warnings go to
//! stderr and never change the exit code.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use raresieve::Error;

#[derive(Parser)]
#[command(
    name = "raresieve",
    version,
    about = "Rare-event filtering, discriminant modeling, and reproduction scorecards"
)]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice a command makes.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress informational output on stdout; artifacts are still written.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a sequential threshold filter from a labeled CSV.
    FilterLearn(commands::filter_learn::Args),
    /// Train the filter -> discriminant -> calibration chain.
    Train(commands::train::Args),
    /// Predict discriminants and calibrated probabilities for a CSV.
    Predict(commands::predict::Args),
    /// Score a model's predictions, optionally with per-fold retraining.
    Evaluate(commands::evaluate::Args),
    /// Score a questionnaire and extend the study's trajectory.
    Score(commands::score::Args),
    /// Print a study's trajectory and re-render its diagram.
    Report(commands::report::Args),
}

/// Error category for the message prefix.
fn category(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "CONFIG",
        Error::Schema(_)
        | Error::Load { .. }
        | Error::Partition(_)
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::Validation(_)
        | Error::TimestampOrder(_) => "DATA",
        Error::InsufficientPositives(_)
        | Error::DegenerateRule(_)
        | Error::UndefinedRate(_)
        | Error::Shape(_)
        | Error::SingularCovariance(_)
        | Error::Uncalibrated(_)
        | Error::PostFilterSingleClass(_) => "MODEL",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let ctx = match config::Context::load(cli.config.as_deref(), cli.seed, cli.quiet) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("CONFIG/{e}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::FilterLearn(args) => commands::filter_learn::run(&ctx, args),
        Command::Train(args) => commands::train::run(&ctx, args),
        Command::Predict(args) => commands::predict::run(&ctx, args),
        Command::Evaluate(args) => commands::evaluate::run(&ctx, args),
        Command::Score(args) => commands::score::run(&ctx, args),
        Command::Report(args) => commands::report::run(&ctx, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}/{e}", category(&e));
            ExitCode::FAILURE
        }
    }
}
