//! Synthetic data-generating process with latent ground truth:
//! `X ~ Uniform[0,1]^2`, `log T | X ~ Normal(3 + 3 x1 - 2 x2, 1)`,
//! `C ~ Uniform[1, t0]`, observed time `min(T, C)` with event `T <= C`.
//!
//! Normal variates come from Box-Muller over the seeded ChaCha stream (see
//! [`crate::rng`]); report metadata records this for reproducibility.

use alloc::vec::Vec;

use crate::data::SurvivalDataset;
use crate::float;
use crate::rng::{Seed, StreamRng};
use crate::{Error, Result};

pub const BETA0: f64 = 3.0;
pub const BETA: [f64; 2] = [3.0, -2.0];

/// Bracket for the censoring-parameter search.
const T0_BRACKET: (f64, f64) = (1.001, 1e4);
/// Monte Carlo sample size used inside the bisection.
const T0_MC_SIZE: usize = 200_000;
/// Tolerance on the achieved censoring rate.
const T0_RATE_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthParams {
    pub beta0: f64,
    pub beta: [f64; 2],
    pub t0: f64,
    pub seed: Seed,
}

/// Observed dataset plus the latent survival and censoring times.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub dataset: SurvivalDataset,
    pub true_time: Vec<f64>,
    pub censor_time: Vec<f64>,
    pub params: SynthParams,
}

/// Draws one sample of size `n`; deterministic per seed.
pub fn generate(n: usize, t0: f64, seed: Seed) -> Result<SyntheticSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !(t0 > 1.0) {
        return Err(Error::InvalidArgument("t0 must exceed 1".into()));
    }
    let mut rng = StreamRng::new(seed);
    let mut covariates = Vec::with_capacity(2 * n);
    let mut true_time = Vec::with_capacity(n);
    let mut censor_time = Vec::with_capacity(n);
    let mut time = Vec::with_capacity(n);
    let mut event = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = rng.uniform();
        let x2 = rng.uniform();
        let mu = BETA0 + BETA[0] * x1 + BETA[1] * x2;
        let t = float::exp(mu + rng.normal());
        let c = rng.uniform_range(1.0, t0);
        covariates.push(x1);
        covariates.push(x2);
        true_time.push(t);
        censor_time.push(c);
        time.push(t.min(c));
        event.push(t <= c);
    }
    let dataset = SurvivalDataset::new(covariates, 2, time, event)?;
    Ok(SyntheticSample {
        dataset,
        true_time,
        censor_time,
        params: SynthParams { beta0: BETA0, beta: BETA, t0, seed },
    })
}

/// Monte Carlo censoring rate at a given t0, over a fixed stream so the
/// estimate is a monotone decreasing function of t0 (common random numbers).
fn censoring_rate(t0: f64, seed: Seed) -> f64 {
    let mut rng = StreamRng::new(seed);
    let mut censored = 0usize;
    for _ in 0..T0_MC_SIZE {
        let x1 = rng.uniform();
        let x2 = rng.uniform();
        let mu = BETA0 + BETA[0] * x1 + BETA[1] * x2;
        let t = float::exp(mu + rng.normal());
        let c = rng.uniform_range(1.0, t0);
        if t > c {
            censored += 1;
        }
    }
    censored as f64 / T0_MC_SIZE as f64
}

/// Bisection on t0 against the Monte Carlo censoring-rate estimate, stopping
/// when the achieved rate is within 0.5% of the target.
pub fn calibrate_t0(target_rate: f64, seed: Seed) -> Result<f64> {
    if !(0.0 < target_rate && target_rate < 1.0) {
        return Err(Error::InvalidArgument(
            "target_rate must lie in (0,1)".into(),
        ));
    }
    let (mut lo, mut hi) = T0_BRACKET;
    let rate_lo = censoring_rate(lo, seed);
    let rate_hi = censoring_rate(hi, seed);
    // rate is decreasing in t0
    if target_rate > rate_lo || target_rate < rate_hi {
        return Err(Error::BracketFailure { target: target_rate, lo, hi });
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let rate = censoring_rate(mid, seed);
        if float::abs(rate - target_rate) <= T0_RATE_TOL {
            return Ok(mid);
        }
        if rate > target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
