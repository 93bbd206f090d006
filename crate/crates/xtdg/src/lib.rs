//! Configuration, file formats and experiment drivers for the `xtdg-core`
//! space–time DG solver.

pub mod config;
pub mod meshio;
pub mod runner;
pub mod tables;

use std::path::PathBuf;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("mesh file: {0}")]
    Mesh(String),

    #[error(transparent)]
    Core(#[from] xtdg_core::Error),

    #[error("gate failed: {0}")]
    Gate(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }
}

impl CliError {
    /// Process exit code: 2 for failed gates, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Gate(_) => 2,
            _ => 1,
        }
    }
}
