//! Command-line front end for `qdiv`: argument parsing, command execution
//! and JSON/CSV reports.
//!
//! Exit codes: 0 when the command's check passes, 1 for usage or
//! configuration errors, 2 when a contract or tolerance check fails.

#![forbid(unsafe_code)]

pub mod args;
pub mod commands;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;
pub use commands::{execute, RunConfig};
pub use report::{Report, ReportError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qdiv::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qdiv::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(
                E::InvalidDimension { .. }
                | E::BellDimension(_)
                | E::NotMaximallyEntangled(_)
                | E::UnsupportedOutcomeCount { .. },
            ) => EXIT_USAGE,
            CliError::Core(_) | CliError::Report(_) => EXIT_FAIL,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// the report to `--out` or `stdout`. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run_cli(&cli, stdout) {
        Ok(report) if report.passed => EXIT_PASS,
        Ok(report) => {
            let _ = writeln!(stderr, "{}: check failed", report.command);
            EXIT_FAIL
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write) -> Result<Report, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let report = execute(&cfg)?;
    let text = report.render(cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(report)
}
