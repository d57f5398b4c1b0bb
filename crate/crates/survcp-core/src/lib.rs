//! Two-sided conformalized survival analysis.
//!
//! Given right-censored data `(x_i, t_i, delta_i)`, the pipeline classifies a
//! test subject as conforming to the non-censored population or not, and
//! returns a two-sided prediction interval for the survival time in the first
//! case, a lower predictive bound in the second. Both steps are calibrated
//! with split conformal prediction, so the coverage guarantees are
//! finite-sample and distribution-free.
//!
//! The crate is `no_std` (with `alloc`); IO, CSV formats and the experiment
//! CLI live in the companion `survcp` crate.
//!
//! Layout:
//! - [`data`]: datasets, splits, intervals, predictions
//! - [`estimators`]: Kaplan-Meier, Cox PH, Weibull AFT, logistic regression
//! - [`conformal`]: conformal quantile/p-value, calibration, prediction
//! - [`scp`]: weighted-conformal baseline with Kaplan-Meier censoring weights
//! - [`synth`]: synthetic data-generating process with latent ground truth
//! - [`metrics`]: group-wise coverage evaluation and censored coverage bounds

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod conformal;
pub mod data;
mod error;
pub mod estimators;
pub(crate) mod float;
pub(crate) mod linalg;
pub mod metrics;
pub mod rng;
pub mod scp;
pub mod synth;

pub use data::{Interval, Prediction, SplitIndices, SurvivalDataset};
pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
