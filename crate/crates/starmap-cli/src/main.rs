mod commands;
mod config;

use clap::Parser;
use std::process::ExitCode;

/// Coded MapReduce over a star network: run bit-exact executions, sample
/// the optimal tradeoff surfaces, dump corner points, evaluate lower
/// bounds, and batch-verify achievability against the bounds.
#[derive(Parser)]
#[command(name = "starmap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
