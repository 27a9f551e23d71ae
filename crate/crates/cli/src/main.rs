//! `dietnet`: preprocessing, synthetic data, cross-validated training,
//! gradient checks and report tables.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "dietnet",
    version,
    about = "Diet Networks for genotype classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a PLINK `.raw` file and a panel, filter by MAF, prune by LD and
    /// write a genotype cache.
    Preprocess(commands::preprocess::Args),
    /// Generate a labelled synthetic dataset from a TOML spec.
    Synth(commands::synth::Args),
    /// Cross-validate the models and baselines of a TOML run config.
    Run(commands::run::Args),
    /// Finite-difference check of every embedding mode on tiny dimensions.
    Gradcheck(commands::gradcheck::Args),
    /// Collect run summaries into one table.
    Report(commands::report::Args),
}

/// Output directory: the flag, else `$DIETNET_OUT/<command>`, else
/// `dietnet-out/<command>`.
pub fn output_dir(flag: Option<PathBuf>, command: &str) -> PathBuf {
    flag.unwrap_or_else(|| {
        let root = std::env::var_os("DIETNET_OUT")
            .map_or_else(|| PathBuf::from("dietnet-out"), PathBuf::from);
        root.join(command)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess::main(a),
        Command::Synth(a) => commands::synth::main(a),
        Command::Run(a) => commands::run::main(a),
        Command::Gradcheck(a) => commands::gradcheck::main(a),
        Command::Report(a) => commands::report::main(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
