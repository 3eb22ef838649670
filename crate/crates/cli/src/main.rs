mod commands;
mod config;
mod output;

use clap::Parser;
use std::process::ExitCode;

use config::{Args, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Numerical(specsing::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<specsing::Error> for CliError {
    fn from(e: specsing::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(args)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let report = commands::run(&cfg)?;
    let text = report.table.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if !report.passed {
        return Err(CliError::Verification(format!(
            "{} reported failing rows",
            cfg.command.name()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("specsing: {e}");
            ExitCode::from(e.code())
        }
    }
}
