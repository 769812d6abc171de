use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DoaError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The noise-subspace projector has a (near) zero diagonal entry, so the
    /// least-squares noise power for that sensor is not identifiable.
    #[error("degenerate projection at sensor {sensor}: tau = {tau:e}")]
    DegenerateProjection { sensor: usize, tau: f64 },

    /// A repeated polynomial root makes the first-order variance undefined.
    #[error("degenerate root {index}: |phi| = {magnitude:e}")]
    DegenerateRoot { index: usize, magnitude: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl DoaError {
    pub fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Format { .. } | Self::Domain(_) => 2,
            Self::DegenerateProjection { .. } | Self::DegenerateRoot { .. } | Self::Numerical(_) => 3,
        }
    }
}

pub type Result<T, E = DoaError> = std::result::Result<T, E>;
