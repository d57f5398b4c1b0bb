use alloc::string::String;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate calibration: {stratum} empty")]
    DegenerateCalibration { stratum: &'static str },

    #[error("{what}: no convergence after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("{what}: singular Hessian; consider raising the ridge penalty")]
    SingularHessian { what: &'static str },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("bracket failure: target rate {target} not attainable over t0 in [{lo}, {hi}]")]
    BracketFailure { target: f64, lo: f64, hi: f64 },
}
