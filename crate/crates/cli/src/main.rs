//! Command line front end. Exit codes: 0 success, 1 usage error, 2 runtime
//! failure.

mod analyze;
mod config;
mod generate;
mod sweep;
mod train_cmd;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "signgraph", version, about = "Graph generators, sign-rank analysis, and latent-embedding training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write pedagogical or low-rank graphs as edge lists and DOT files
    #[command(subcommand)]
    Generate(generate::GenerateCmd),
    /// Train one architecture on one graph and write the run directory
    Train(train_cmd::TrainArgs),
    /// Run a grid of training runs and merge the results into one CSV
    Sweep(sweep::SweepArgs),
    /// Rank bounds, witnesses, and embeddings for a graph
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCmd),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Generate(cmd) => generate::run(cmd),
        Command::Train(args) => train_cmd::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Analyze(cmd) => analyze::run(cmd),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
