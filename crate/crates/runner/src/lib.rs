//! Scenario configuration, figure presets, parameter sweeps and output
//! bundles for the `ddcsim` command line tool.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

use ddc_core::{AnalyticsError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("unknown preset `{0}` (expected fig1..fig8)")]
    UnknownPreset(String),
    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid sweep value `{value}` for `{param}`")]
    InvalidValue { param: String, value: String },
}

impl RunnerError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        RunnerError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Short machine-readable category of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            RunnerError::Io { .. } => "io",
            RunnerError::Schema { .. } => "validation",
            RunnerError::Sim(SimError::InvalidConfig { .. }) => "validation",
            RunnerError::Sim(SimError::CoupledMismatch(_)) => "validation",
            RunnerError::Sim(SimError::Integration { .. }) => "integration",
            RunnerError::Analytics(_) => "analytics",
            RunnerError::UnknownPreset(_)
            | RunnerError::UnknownParameter(_)
            | RunnerError::InvalidValue { .. } => "usage",
        }
    }

    /// Config field implicated in the failure, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            RunnerError::Schema { field, .. } => Some(field),
            RunnerError::Sim(SimError::InvalidConfig { field, .. }) => Some(field),
            RunnerError::UnknownParameter(p) | RunnerError::InvalidValue { param: p, .. } => Some(p),
            _ => None,
        }
    }
}

pub type Result<T, E = RunnerError> = std::result::Result<T, E>;
