//! Experiment harness for `ftpl-core`: spec parsing, TOML configs,
//! deterministic parallel simulation, CSV output, envelope verdicts and the
//! FFT side of the characteristic-function inversion.

pub mod config;
pub mod experiment;
pub mod ift;
pub mod io;
pub mod specs;
pub mod verdict;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("bad spec {0}")]
    Spec(String),
    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("metadata mismatch: {0}")]
    MetadataMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl LabError {
    /// Exit status for the CLI: 2 for usage problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Spec(_) | LabError::Config { .. } | LabError::MetadataMismatch(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub(crate) fn numeric(e: impl std::fmt::Debug) -> Self {
        LabError::Numeric(format!("{e:?}"))
    }
}
