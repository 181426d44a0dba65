//! Command-line pipelines over the scoring and evaluation library.
//!
//! Exit codes: 0 success, 1 validation failure, 2 i/o failure, 3 numerical
//! failure.

mod commands;

use clap::{Parser, Subcommand};

use commands::{consistency, evaluate, report, score, simulate, CliError};

#[derive(Parser)]
#[command(
    name = "argrank",
    version,
    about = "Quality scores from binary crowd annotations, and the statistics to judge them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic annotated corpus with known ground truth.
    Simulate(simulate::SimulateArgs),
    /// Derive per-argument quality scores from raw annotations.
    Score(score::ScoreArgs),
    /// Evaluate external predictions against gold quality scores.
    Evaluate(evaluate::EvaluateArgs),
    /// Split-half and delta-bin consistency protocols.
    Consistency(consistency::ConsistencyArgs),
    /// Summarize a JSON report produced by the other subcommands.
    Report(report::ReportArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Score(args) => score::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Consistency(args) => consistency::run(args),
        Command::Report(args) => report::run(args),
    };
    if let Err(error) = result {
        eprintln!("error: {}", error.message);
        std::process::exit(error.code);
    }
}

impl From<argrank::Error> for CliError {
    fn from(e: argrank::Error) -> Self {
        let code = if e.is_io() {
            2
        } else if e.is_numerical() {
            3
        } else {
            1
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}
