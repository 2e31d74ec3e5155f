mod args;
mod check;
mod commands;
mod error;
mod output;
mod sweep;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, Status};
use crate::output::Sink;

fn run(cli: Cli) -> Result<Status, CliError> {
    let sink = Sink {
        out: cli.out,
        format: cli.format,
    };
    match &cli.command {
        Command::Solve(a) => commands::solve(a, &sink),
        Command::Minimize(a) => commands::minimize_cmd(a, &sink),
        Command::Energy(a) => commands::energy(a, &sink),
        Command::Pressure(a) => commands::pressure(a, &sink),
        Command::Check(a) => check::check(a, &sink),
        Command::Sweep(a) => sweep::sweep(a, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
