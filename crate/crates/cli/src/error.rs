use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NotFound(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<wgmopo_core::Error> for CliError {
    fn from(e: wgmopo_core::Error) -> Self {
        use wgmopo_core::Error as E;
        match e {
            E::Domain { .. } | E::Asset(_) => CliError::Config(e.to_string()),
            E::NoConvergence { .. } | E::Stagnation { .. } | E::FitNoConvergence { .. } => CliError::Numerical(e.to_string()),
            E::NotFound(_) | E::OutOfRange { .. } => CliError::NotFound(e.to_string()),
        }
    }
}
