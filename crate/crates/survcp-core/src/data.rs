//! Datasets, splits, intervals and predictions.

use alloc::format;
use alloc::vec::Vec;

use crate::float;
use crate::rng::{Seed, StreamRng};
use crate::{Error, Result};

/// Right-censored survival data: covariates, observed times and event flags.
///
/// `time[i]` is the censored survival time (minimum of the latent survival and
/// censoring times) and `event[i]` is true when the death was observed.
/// Covariates are stored row-major, `n` rows by `d` columns. All types here
/// are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    covariates: Vec<f64>,
    n: usize,
    d: usize,
    time: Vec<f64>,
    event: Vec<bool>,
}

impl SurvivalDataset {
    pub fn new(covariates: Vec<f64>, d: usize, time: Vec<f64>, event: Vec<bool>) -> Result<Self> {
        let n = time.len();
        if n == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        if event.len() != n {
            return Err(Error::InvalidData(format!(
                "time has {n} rows but event has {}",
                event.len()
            )));
        }
        if covariates.len() != n * d {
            return Err(Error::InvalidData(format!(
                "covariate matrix has {} entries, expected {n} x {d}",
                covariates.len()
            )));
        }
        if let Some((i, _)) = time
            .iter()
            .enumerate()
            .find(|(_, t)| !t.is_finite() || **t <= 0.0)
        {
            return Err(Error::InvalidData(format!(
                "time[{i}] must be strictly positive and finite"
            )));
        }
        if let Some(i) = covariates.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "covariate entry {i} is not finite"
            )));
        }
        Ok(SurvivalDataset { covariates, n, d, time, event })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.d..(i + 1) * self.d]
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn event(&self) -> &[bool] {
        &self.event
    }
}

/// Train/calibration partition, with the calibration set further stratified by
/// event status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub cal: Vec<usize>,
    /// Censored calibration rows (event = false).
    pub cal0: Vec<usize>,
    /// Non-censored calibration rows (event = true).
    pub cal1: Vec<usize>,
}

/// Uniformly random train/calibration partition, deterministic per seed.
///
/// The calibration strata may be empty (for instance when every event flag is
/// true); downstream calibration reports that as a degenerate-calibration
/// condition rather than failing here.
pub fn split_dataset(
    data: &SurvivalDataset,
    train_fraction: f64,
    seed: Seed,
) -> Result<SplitIndices> {
    let n = data.n();
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction {train_fraction} not in (0,1)"
        )));
    }
    if n < 4 {
        return Err(Error::InvalidData(format!("need at least 4 rows, got {n}")));
    }
    let n_train = (float::round(train_fraction * n as f64) as usize).clamp(1, n - 2);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = StreamRng::new(seed);
    rng.shuffle(&mut order);

    let mut train = order[..n_train].to_vec();
    let mut cal = order[n_train..].to_vec();
    train.sort_unstable();
    cal.sort_unstable();

    let cal0: Vec<usize> = cal.iter().copied().filter(|&i| !data.event()[i]).collect();
    let cal1: Vec<usize> = cal.iter().copied().filter(|&i| data.event()[i]).collect();

    Ok(SplitIndices { train, cal, cal0, cal1 })
}

/// Prediction interval; the upper endpoint may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0) || lower > upper || lower.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "invalid interval [{lower}, {upper}]"
            )));
        }
        Ok(Interval { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Finite upper endpoint is the two-sided group marker.
    pub fn is_two_sided(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Output of the two-sided procedure for one test subject.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Prediction {
    /// Subject classified as conforming to the non-censored population;
    /// carries a full interval (possibly with infinite upper end).
    TwoSided(Interval),
    /// Lower predictive bound only.
    LowerOnly(f64),
}

impl Prediction {
    /// The classification decision this prediction encodes.
    pub fn event_class(&self) -> bool {
        matches!(self, Prediction::TwoSided(_))
    }

    pub fn lower(&self) -> f64 {
        match self {
            Prediction::TwoSided(iv) => iv.lower(),
            Prediction::LowerOnly(lb) => *lb,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            Prediction::TwoSided(iv) => iv.upper(),
            Prediction::LowerOnly(_) => f64::INFINITY,
        }
    }

    /// Whether the prediction set contains `t`.
    pub fn contains(&self, t: f64) -> bool {
        self.lower() <= t && t <= self.upper()
    }

    /// Finite-upper group marker used throughout evaluation.
    pub fn has_finite_upper(&self) -> bool {
        self.upper().is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy(n: usize, events: &[bool]) -> SurvivalDataset {
        let time: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        SurvivalDataset::new(vec![0.0; n], 1, time, events.to_vec()).unwrap()
    }

    #[test]
    fn split_partition_arithmetic() {
        let data = toy(4, &[true, true, false, false]);
        let s = split_dataset(&data, 0.5, Seed::new(42)).unwrap();
        assert_eq!(s.train.len(), 2);
        assert_eq!(s.cal.len(), 2);
        let mut joined = s.cal0.clone();
        joined.extend(&s.cal1);
        joined.sort_unstable();
        assert_eq!(joined, s.cal);
    }

    #[test]
    fn split_deterministic() {
        let data = toy(20, &[true; 20]);
        let a = split_dataset(&data, 0.5, Seed::new(7)).unwrap();
        let b = split_dataset(&data, 0.5, Seed::new(7)).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(&data, 0.5, Seed::new(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_all_events_leaves_cal0_empty() {
        let data = toy(10, &[true; 10]);
        let s = split_dataset(&data, 0.5, Seed::new(1)).unwrap();
        assert!(s.cal0.is_empty());
        assert_eq!(s.cal1, s.cal);
    }

    #[test]
    fn interval_rejects_inverted_bounds() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(-1.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn dataset_rejects_nonpositive_times() {
        assert!(SurvivalDataset::new(vec![0.0], 1, vec![0.0], vec![true]).is_err());
        assert!(SurvivalDataset::new(vec![0.0], 1, vec![f64::NAN], vec![true]).is_err());
    }

    #[test]
    fn prediction_event_class_matches_variant() {
        let p = Prediction::TwoSided(Interval::new(1.0, 2.0).unwrap());
        assert!(p.event_class());
        assert!(!Prediction::LowerOnly(0.5).event_class());
    }
}
