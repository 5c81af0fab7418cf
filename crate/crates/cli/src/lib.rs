//! Command-line front end. [`run`] executes one invocation in-process and
//! returns its exit code and output bytes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
mod commands;
pub mod emit;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub use args::{Cli, Command, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failed invocation. The message starts with the violated rule's name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags or parameters: exit 2.
    Usage(String),
    /// A check ran and failed: exit 1, with whatever was produced.
    Verification { message: String, stdout: Vec<u8> },
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verification { .. } => EXIT_VERIFY,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Verification { message, .. } => f.write_str(message),
        }
    }
}

pub(crate) fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Exit code plus the bytes meant for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text.into_bytes(), stderr: String::new() }
            } else {
                Outcome { code, stdout: Vec::new(), stderr: format!("Usage: {text}") }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let mut notes = String::new();
    let result = commands::dispatch(&cli.command, &mut notes);
    let out_path = commands::out_path(&cli.command);
    let (code, bytes) = match result {
        Ok(bytes) => (EXIT_OK, bytes),
        Err(CliError::Usage(m)) => {
            notes.push_str(&m);
            notes.push('\n');
            return Outcome { code: EXIT_USAGE, stdout: Vec::new(), stderr: notes };
        }
        Err(CliError::Verification { message, stdout }) => {
            notes.push_str(&message);
            notes.push('\n');
            (EXIT_VERIFY, stdout)
        }
    };
    match out_path {
        Some(path) => match std::fs::write(path, &bytes) {
            Ok(()) => Outcome { code, stdout: Vec::new(), stderr: notes },
            Err(e) => Outcome {
                code: EXIT_USAGE,
                stdout: Vec::new(),
                stderr: format!("{notes}OutputError: cannot write {}: {e}\n", path.display()),
            },
        },
        None => Outcome { code, stdout: bytes, stderr: notes },
    }
}
