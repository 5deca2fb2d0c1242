mod args;
mod campaign;
mod commands;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    /// Bad flags, campaign file or missing seed.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }

    pub fn output(msg: impl Into<String>) -> Self {
        Self { code: 4, msg: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<qfsk_lab::Error> for Failure {
    fn from(e: qfsk_lab::Error) -> Self {
        use qfsk_lab::Error as E;
        let code = match e {
            E::DtildeTooSmall { .. } => 3,
            E::Parse(_) | E::InvalidCode(_) | E::InvalidParameter(_) | E::ObservationLength { .. } => 2,
            _ => 1,
        };
        Self { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search(a) => commands::search(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Fer(a) => commands::fer(a),
        Command::Rcu(a) => commands::rcu(a),
        Command::Normal(a) => commands::normal(a),
        Command::Gap(a) => commands::gap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
