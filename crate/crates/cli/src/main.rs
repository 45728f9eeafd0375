mod commands;
mod config;
mod report;

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, ExperimentConfig, Format};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Artifact(String),
    Library(heterochaos::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage: {s}"),
            CliError::Artifact(s) => write!(f, "missing or unreadable artifact: {s}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<heterochaos::Error> for CliError {
    fn from(e: heterochaos::Error) -> Self {
        CliError::Library(e)
    }
}

impl CliError {
    /// 2 when a cap or budget ran out, 1 for everything else.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(heterochaos::Error::ExceededCap { .. })
            | CliError::Library(heterochaos::Error::BudgetExceeded { .. }) => 2,
            _ => 1,
        }
    }
}

fn execute(config: &ExperimentConfig) -> Result<(), CliError> {
    if let Some(n) = config.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = commands::run(config)?;
    let text = match config.global.format {
        Format::Csv => out.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.to_json(config)).expect("json output");
            s.push('\n');
            s
        }
    };
    match &config.global.out {
        Some(path) => std::fs::write(path, text).map_err(CliError::Io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(CliError::Io),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let config = ExperimentConfig {
        global: cli.global,
        command: cli.command,
    };
    match execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
