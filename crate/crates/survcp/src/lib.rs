//! Experiment driver around `survcp-core`: synthetic simulation studies, CSV
//! dataset runs, and machine-readable reports. The binary in `main.rs` is a
//! thin argument-parsing layer over this library.

pub mod config;
pub mod csvio;
pub mod experiment;
pub mod report;

pub use config::{Method, ModelKind, RunConfig, SimulateConfig};

/// Configuration problem detected after argument parsing (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// Malformed or unusable input data (exit code 3).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct DataError(pub String);

/// Process exit code for an error: 2 configuration, 3 data, 4 numerical.
pub fn error_exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<DataError>().is_some() {
        return 3;
    }
    if let Some(e) = err.downcast_ref::<survcp_core::Error>() {
        return match e {
            survcp_core::Error::InvalidArgument(_) => 2,
            survcp_core::Error::InvalidData(_)
            | survcp_core::Error::EmptyInput(_)
            | survcp_core::Error::DegenerateCalibration { .. } => 3,
            survcp_core::Error::NonConvergence { .. }
            | survcp_core::Error::SingularHessian { .. }
            | survcp_core::Error::BracketFailure { .. } => 4,
        };
    }
    3
}
