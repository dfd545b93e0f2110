use std::io;

use ipc_core::IpcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] IpcError),

    #[error("{0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    /// The run finished without meeting the stopping criterion.
    #[error("{0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 for bad input, 3 when a solver or inner solve fails to converge, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io { .. } | HarnessError::Csv(_) => 4,
            HarnessError::NotConverged(_) => 3,
            HarnessError::Core(e) => match e {
                IpcError::Validation(_)
                | IpcError::Domain(_)
                | IpcError::DimensionMismatch { .. }
                | IpcError::UnsupportedOracle(_)
                | IpcError::MissingSolution => 2,
                IpcError::Format(_) => 4,
                IpcError::StationaryPoint(_)
                | IpcError::LineSearchStall { .. }
                | IpcError::Internal(_)
                | IpcError::DomainViolation { .. }
                | IpcError::NoConvergence { .. } => 3,
            },
        }
    }
}
