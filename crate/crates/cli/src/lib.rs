//! Library half of the `superpilot` binary: spec parsing, CSV output and the
//! error categories that map onto exit codes.

pub mod csv_out;
pub mod partition;
pub mod plot;
pub mod spec;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Simulation(superpilot::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input(_) => "input",
            CliError::Io { .. } => "io",
            CliError::Simulation(_) => "simulation",
        }
    }

    /// 2 is left to argument-parsing failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Input(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Simulation(_) => 6,
        }
    }
}

impl From<superpilot::Error> for CliError {
    fn from(e: superpilot::Error) -> Self {
        use superpilot::Error as E;
        match e {
            E::InvalidConfig(_) | E::InvalidSweep(_) | E::UnsupportedLayout(_) | E::PilotCapacity { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Simulation(other),
        }
    }
}
