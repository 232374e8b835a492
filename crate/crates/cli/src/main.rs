//! `cmcca`: batch front end for cross-modal canonical correlation analysis.

mod commands;
mod config;
mod error;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Resolver;
use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "cmcca", version, about = "Cross-modal canonical correlation analysis")]
struct Cli {
    /// Flat TOML file of settings; explicit flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dense CCA with Wilks tests, loadings and variate scatter
    Cca(commands::cca::CcaArgs),
    /// Sparse CCA with a permutation test
    Scca(commands::scca::SccaArgs),
    /// Gene-set enrichment of loading-selected genes
    Enrich(commands::enrich::EnrichArgs),
    /// Per-sample summaries of a per-cell feature table
    Summarize(commands::summarize::SummarizeArgs),
    /// Planted-factor synthetic dataset
    Simulate(commands::simulate::SimulateArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = Resolver::new(cli.config.as_deref())?;
    match cli.command {
        Command::Cca(a) => commands::cca::run(a, cfg),
        Command::Scca(a) => commands::scca::run(a, cfg),
        Command::Enrich(a) => commands::enrich::run(a, cfg),
        Command::Summarize(a) => commands::summarize::run(a, cfg),
        Command::Simulate(a) => commands::simulate::run(a, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            let err = CliError::usage(first.trim_start_matches("error: "));
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.code)
        }
    }
}
