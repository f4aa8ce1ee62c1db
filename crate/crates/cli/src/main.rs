//! `microsets`: construct stage sets, decide covers, run the procedures and
//! the adversary demos, and check the invariant suite.
//!
//! Exit codes: 0 ok, 1 invariant failure, 2 bad input, 3 horizon-inconclusive.

mod args;
mod commands;
mod verify;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Format};

/// How a run ended, apart from hard errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Invariant,
    Inconclusive,
}

impl Status {
    pub fn worst(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Invariant, _) | (_, Invariant) => Invariant,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Ok,
        }
    }

    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Invariant => 1,
            Status::Inconclusive => 3,
        }
    }
}

/// What a subcommand produces: the JSON document, its figure-data table and
/// the status.
pub struct Artifact {
    pub json: serde_json::Value,
    pub tsv: String,
    pub status: Status,
    /// Format used when `--format` is absent.
    pub default_format: Format,
}

impl Artifact {
    pub fn new(json: serde_json::Value, tsv: String) -> Self {
        Artifact { json, tsv, status: Status::Ok, default_format: Format::Json }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }
}

fn error_code(err: &anyhow::Error) -> u8 {
    use microsets::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::HorizonExceeded(_) | E::DepthLimit { .. } | E::BudgetLimit { .. } | E::Uncertified(_)) => 3,
        Some(E::InvalidCover(_)) => 1,
        _ => 2,
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let artifact = commands::dispatch(&cli.command)?;
    let text = match cli.format.unwrap_or(artifact.default_format) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&artifact.json)?;
            s.push('\n');
            s
        }
        Format::Tsv => artifact.tsv,
    };
    write_out(cli.out.as_deref(), &text)?;
    Ok(artifact.status)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match args::expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
