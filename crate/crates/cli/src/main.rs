//! `ebsample`: every operation of the library behind one binary.
//!
//! Exit codes: 0 true/certified, 1 false/violation, 2 inconclusive,
//! 3 usage error, 4 data error, 5 internal invariant violation.

mod args;
mod commands;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ebsampling::Execution;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command};

const USAGE: u8 = 3;
const DATA: u8 = 4;
const INTERNAL: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn from_core(e: ebsampling::Error) -> Self {
        use ebsampling::Error as E;
        match e {
            E::Invariant(_) => CliError::Internal(e.to_string()),
            E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            CliError::Internal(m) => CliError::Internal(format!("{what}: {m}")),
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => USAGE,
            CliError::Data(_) => DATA,
            CliError::Internal(_) => INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

#[derive(Serialize)]
struct RunConfig<'a> {
    #[serde(flatten)]
    command: &'a Command,
    json: bool,
    out: Option<&'a std::path::Path>,
    sequential: bool,
    resolved: &'a Value,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    config: RunConfig<'a>,
    warnings: &'a [String],
    exit_code: i32,
    result: &'a Value,
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let outcome = commands::run(&cli.command, cli.json, exec)?;
    let report = Report {
        tool: "ebsample",
        version: env!("CARGO_PKG_VERSION"),
        config: RunConfig {
            command: &cli.command,
            json: cli.json,
            out: cli.out.as_deref(),
            sequential: cli.sequential,
            resolved: &outcome.resolved,
        },
        warnings: &outcome.warnings,
        exit_code: outcome.code,
        result: &outcome.result,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(format!("report serialization: {e}")))?
        + "\n";
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    let mut emit = |s: &str| {
        stdout
            .write_all(s.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}")))
    };
    match (&outcome.csv, &cli.out) {
        // CSV payload to the file, report to stdout
        (Some(csv), Some(path)) => {
            write_file(path, csv)?;
            emit(&text)?;
        }
        (Some(csv), None) if matches!(cli.command, Command::Plotdata(_)) => emit(csv)?,
        (_, Some(path)) if outcome.csv.is_none() => write_file(path, &text)?,
        _ => emit(&text)?,
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
