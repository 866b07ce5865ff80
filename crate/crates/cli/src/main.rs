mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Invalid, Overrides, RunConfig};

/// Group sequential two-stage preference trial designs.
#[derive(Parser)]
#[command(name = "prefseq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed and maximum sample sizes, accrual schedule and boundaries.
    Design(Overrides),
    /// Monte Carlo operating characteristics, optionally over a grid.
    Simulate(Overrides),
    /// Stopping boundaries for plotting.
    Boundaries(Overrides),
    /// Empirical covariance of per-period selection and preference statistics.
    VerifyIncrements(Overrides),
}

fn run(cli: Cli) -> Result<()> {
    let (overrides, command): (&Overrides, fn(&RunConfig) -> Result<()>) = match &cli.command {
        Command::Design(o) => (o, commands::design),
        Command::Simulate(o) => (o, commands::simulate),
        Command::Boundaries(o) => (o, commands::boundaries),
        Command::VerifyIncrements(o) => (o, commands::verify_increments_cmd),
    };
    let config = RunConfig::resolve(overrides)?;
    if overrides.print_config {
        print!("{}", config.to_toml());
        return Ok(());
    }
    command(&config)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<prefseq_core::Error>() {
        if e.is_validation() {
            2
        } else {
            1
        }
    } else if err.downcast_ref::<Invalid>().is_some() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
