mod args;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use commands::{Failure, RunContext};

const DEFAULT_SEED: u64 = 42;

fn run() -> Result<(), Failure> {
    let raw: Vec<_> = std::env::args_os().collect();
    let command = Cli::command();
    let argv = config::expand_args(&command, raw).map_err(|e| Failure::Usage(format!("{e:#}")))?;
    let matches = command
        .try_get_matches_from(argv)
        .unwrap_or_else(|e| e.exit());
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());

    let ctx = RunContext {
        out_dir: cli.out_dir.unwrap_or_else(|| PathBuf::from(".")),
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
    };
    match &cli.command {
        Command::Sweep(a) => commands::sweep(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Plot(a) => commands::plot(&ctx, a),
        Command::Reproduce(a) => commands::reproduce(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
