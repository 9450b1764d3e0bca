//! Command-line front end: file formats, layered configuration, run reports
//! and the subcommands that drive the `protoalign` library.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 numerical
//! non-convergence or a failed post-hoc invariant check (outputs and the
//! report are still written).

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::config::{load_layer, RunConfig};
use crate::error::Result;
use crate::report::Status;

/// Parse `args` (including the program name) and run the command.
pub fn execute<I, S>(args: I) -> Result<Status>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| error::CliError::Config(e.to_string()))?;
    dispatch(&cli)
}

pub fn dispatch(cli: &Cli) -> Result<Status> {
    let file = cli.config.as_deref().map(load_layer).transpose()?;
    let mut flags = cli.command.layer();
    if cli.seed.is_some() {
        flags.seed = cli.seed;
    }
    let cfg = RunConfig::resolve(file.as_ref(), &flags)?;
    match &cli.command {
        Command::Solve(a) => commands::solve(a, &cfg),
        Command::Schedule(a) => commands::schedule(a, &cfg),
        Command::Align(a) => commands::align(a, &cfg),
        Command::Km(a) => commands::km(a, &cfg),
        Command::Cindex(a) => commands::cindex(a, &cfg),
        Command::Loss(a) => commands::loss(a, &cfg),
    }
}

/// Entry point for the binary: returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(status) => {
            if status != Status::Ok {
                eprintln!("{}: finished with status {status:?}; see report.json", cli.command.name());
            }
            status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
