//! Command-line front end and HTTP service for the garment dataset engine.

pub mod commands;
pub mod serve;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{Cli, CliError, Command};

/// Parse `args` and run the chosen subcommand. Returns the process exit
/// code: 0 on success, 1 on operational failure, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
