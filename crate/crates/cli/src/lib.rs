//! Command-line front end for `qnpr-core`.
//!
//! Exit codes: 0 success, 1 usage or configuration, 2 data, 3 numeric or
//! degrees of freedom.

pub mod args;
pub mod commands;
pub mod coverage;
pub mod error;
pub mod ingest;
pub mod plot;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, SEED_ENV};
pub use error::{CliError, Result};
pub use ingest::{ingest_csv, ColumnRef, Table};
pub use report::FitReport;

/// Parses `argv` and runs it. Returns the process exit code.
pub fn run<I, T>(
    argv: I,
    env_seed: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match commands::dispatch(cli.command, env_seed, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
