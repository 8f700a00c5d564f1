//! Command-line front end: pricing tables, energy allocation, fleet
//! deployment, Monte-Carlo replay and benchmark sweeps, written as CSV.

mod commands;
mod config;
mod failure;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{allocate, benchmark, deploy, price, simulate};
use failure::Outcome;

#[derive(Debug, Parser)]
#[command(name = "uav-pricing", version, about = "Pricing, energy allocation and deployment for UAV-provided services")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Price(price::PriceArgs),
    Allocate(allocate::AllocateArgs),
    Deploy(deploy::DeployArgs),
    Simulate(simulate::SimulateArgs),
    Benchmark(benchmark::BenchmarkArgs),
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Price(args) => price::run(args),
        Command::Allocate(args) => allocate::run(args),
        Command::Deploy(args) => deploy::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Benchmark(args) => benchmark::run(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
