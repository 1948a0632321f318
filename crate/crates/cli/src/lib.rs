//! Reproducible runs over quasiperiodic potentials: configs, run directories with
//! hashed manifests, and SVG plots rendered from the emitted data files.

use std::path::Path;

use thiserror::Error;

pub mod config;
pub mod io;
pub mod manifest;
pub mod render;
pub mod stages;

pub use config::{RunConfig, StageConfig, SCHEMA_VERSION};
pub use manifest::{run, RunManifest, RunOptions, RunOutcome, StageRecord, StageStatus};
pub use render::{render, PlotKind, PlotSpec};

/// Thread-count override for the worker pool.
pub const THREADS_ENV: &str = "QUASILINES_THREADS";

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const STAGE_FAILED: i32 = 3;
    /// Every verdict produced was undetermined.
    pub const UNDETERMINED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("stage {index} ({kind}) failed: {message}")]
    StageFailed {
        index: usize,
        kind: String,
        message: String,
    },
    #[error("missing or unreadable data: {0}")]
    MissingData(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } | CliError::MissingData(_) => exit::CONFIG,
            CliError::StageFailed { .. } | CliError::Io { .. } => exit::STAGE_FAILED,
        }
    }
}
