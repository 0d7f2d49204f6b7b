//! Experiment driver for the rbmvr estimators: TOML configuration, the
//! `build-rb`, `run`, `select` and `oracle` subcommands and versioned CSV
//! output.

pub mod commands;
pub mod config;
pub mod results;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 2 for configuration and input problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<rbmvr_core::Error> for CliError {
    fn from(e: rbmvr_core::Error) -> Self {
        use rbmvr_core::Error as E;
        match e {
            E::Config(_) | E::Parse { .. } => CliError::Config(e.to_string()),
            E::Io(io) => CliError::Io(io.to_string()),
            E::Singular { .. } | E::StabilityUnavailable(_) | E::InsufficientSamples(_) | E::Diverged(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
