//! Config-driven experiment runner for nonlocal PML simulations.
//!
//! Each command reads a [`config::RunConfig`] and writes CSV files plus a
//! `manifest.cfg` holding every effective parameter, so that a run can be
//! repeated from its manifest alone.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] nlpml::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: rejected input or parameters map to 2, a blow-up
    /// to 3, anything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Solver(e) => match e {
                nlpml::Error::BlowUp { .. } => EXIT_BLOWUP,
                nlpml::Error::Validation(_) | nlpml::Error::Config(_) | nlpml::Error::Domain(_) => EXIT_VALIDATION,
                nlpml::Error::Numeric { .. } => EXIT_FAILURE,
            },
            CliError::Io { .. } | CliError::Csv(_) => EXIT_FAILURE,
        }
    }
}
