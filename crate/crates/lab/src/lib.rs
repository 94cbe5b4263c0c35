//! Experiment harness: configs, recipes and CSV/JSON output.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{ExperimentKind, ModeName, RunConfig};
pub use experiments::{compute, run_experiment, validate, Artifacts};
pub use output::{emit_csv, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] pite_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl LabError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for malformed configs, 3 for violated numeric preconditions, 1
    /// for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Core(e) if e.is_numeric_precondition() => 3,
            LabError::Core(_) => 2,
            LabError::Io { .. } => 1,
        }
    }
}
