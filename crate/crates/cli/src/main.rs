//! wearsim: trace-driven LLC simulator for NVM wear-leveling experiments.

mod commands;
mod config_file;
mod output;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "wearsim",
    version,
    about = "Trace-driven set-associative LLC simulator with wear-leveling policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace
    Gen(commands::GenArgs),
    /// Simulate one trace under one policy and write metrics
    Run(commands::RunArgs),
    /// Run several policies over the same trace and compare
    Compare(commands::CompareArgs),
    /// Re-run one policy while sweeping a parameter
    Sweep(commands::SweepArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::cmd_gen(args),
        Command::Run(args) => commands::cmd_run(args),
        Command::Compare(args) => commands::cmd_compare(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
