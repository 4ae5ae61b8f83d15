//! `msaw` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (arguments, configuration,
//! malformed files), 2 failure while processing valid input.

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod plot;

/// Environment variable naming the directory searched for relative
/// `--scenario` paths that do not exist in the working directory.
pub const SCENARIO_DIR_VAR: &str = "MSAW_SCENARIO_DIR";

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Processing(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Processing(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Processing(m) => f.write_str(m),
        }
    }
}

impl From<msaw_core::Error> for Failure {
    fn from(e: msaw_core::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Processing(e.to_string())
        }
    }
}

/// Parses `argv` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
