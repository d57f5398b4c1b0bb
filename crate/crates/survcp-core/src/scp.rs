//! Weighted-conformal baseline: calibration on the non-censored rows with
//! inverse Kaplan-Meier censoring weights, scanning a candidate time grid with
//! a time-dependent point mass at infinity.

use alloc::vec::Vec;

use crate::data::{Interval, SplitIndices, SurvivalDataset};
use crate::estimators::{censoring_survival, KaplanMeierCurve, SurvivalModel};
use crate::float;
use crate::{Error, Result};

/// Quantile of the discrete distribution placing mass `weights[i]` at
/// `values[i]` and `tail_weight` at `+inf` (all masses normalized).
pub fn weighted_quantile(
    values: &[f64],
    weights: &[f64],
    tail_weight: f64,
    level: f64,
) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("weighted_quantile values"));
    }
    if values.len() != weights.len() {
        return Err(Error::InvalidData("values/weights length mismatch".into()));
    }
    let total: f64 = weights.iter().sum::<f64>() + tail_weight;
    if !(total > 0.0) {
        return Err(Error::InvalidData("total mass must be positive".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i];
        if cum >= level * total {
            return Ok(values[i]);
        }
    }
    Ok(f64::INFINITY)
}

/// Weighted calibration state for the baseline: scores and times of the
/// non-censored calibration rows, their inverse-censoring weights, and the
/// Kaplan-Meier censoring curve.
#[derive(Debug, Clone)]
pub struct WeightedCalibration {
    pub cal_scores: Vec<f64>,
    pub cal_times: Vec<f64>,
    pub censor_curve: KaplanMeierCurve,
    pub alpha: f64,
    /// Rows dropped because the censoring survival vanished at their time.
    pub dropped: usize,
    // scores sorted ascending with a weight prefix-sum, for the grid scan
    sorted_scores: Vec<f64>,
    prefix_weights: Vec<f64>,
    total_weight: f64,
}

/// Builds the weighted calibration: scores `|1/2 - F(t_i | x_i)|` on the
/// non-censored calibration rows with weights `1 / G(t_i-)`; rows where the
/// left limit of the censoring survival is zero are dropped and counted.
pub fn scp_calibrate<M: SurvivalModel>(
    data: &SurvivalDataset,
    split: &SplitIndices,
    survival_model: &M,
    alpha: f64,
) -> Result<WeightedCalibration> {
    if split.cal1.is_empty() {
        return Err(Error::DegenerateCalibration { stratum: "cal1" });
    }
    let censor_curve = censoring_survival(data, &split.cal)?;

    let mut cal_scores = Vec::new();
    let mut cal_times = Vec::new();
    let mut weights = Vec::new();
    let mut dropped = 0usize;
    for &i in &split.cal1 {
        let t = data.time()[i];
        let g = censor_curve.survival_left(t);
        if g <= 0.0 {
            dropped += 1;
            continue;
        }
        cal_scores.push(float::abs(0.5 - survival_model.cdf(data.row(i), t)));
        cal_times.push(t);
        weights.push(1.0 / g);
    }

    let mut order: Vec<usize> = (0..cal_scores.len()).collect();
    order.sort_unstable_by(|&a, &b| cal_scores[a].total_cmp(&cal_scores[b]));
    let sorted_scores: Vec<f64> = order.iter().map(|&i| cal_scores[i]).collect();
    let mut prefix_weights = Vec::with_capacity(order.len());
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i];
        prefix_weights.push(cum);
    }

    Ok(WeightedCalibration {
        cal_scores,
        cal_times,
        censor_curve,
        alpha,
        dropped,
        sorted_scores,
        prefix_weights,
        total_weight: cum,
    })
}

impl WeightedCalibration {
    /// Score threshold for one candidate time: the `(1 - alpha)` weighted
    /// quantile with tail mass `1 / G(t-)` at `+inf`. A vanishing censoring
    /// survival makes the tail mass dominant, saturating the threshold.
    pub fn threshold_at(&self, t: f64) -> f64 {
        let g = self.censor_curve.survival_left(t);
        if g <= 0.0 {
            return f64::INFINITY;
        }
        let tail = 1.0 / g;
        let target = (1.0 - self.alpha) * (self.total_weight + tail);
        if self.sorted_scores.is_empty() || target > self.total_weight {
            return f64::INFINITY;
        }
        let k = self.prefix_weights.partition_point(|&c| c < target);
        self.sorted_scores[k.min(self.sorted_scores.len() - 1)]
    }
}

/// Log-spaced candidate grid from `min(time)/2` to `max(time)` (512 points);
/// the largest observed time is the finiteness sentinel.
pub fn default_time_grid(data: &SurvivalDataset, rows: &[usize]) -> Vec<f64> {
    let times: Vec<f64> = rows.iter().map(|&i| data.time()[i]).collect();
    let lo = float::slice_min(&times) / 2.0;
    let hi = float::slice_max(&times);
    let n = 512usize;
    let (llo, lhi) = (float::ln(lo), float::ln(hi));
    (0..n)
        .map(|k| float::exp(llo + (lhi - llo) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Weighted-conformal prediction interval for one test point: scans the grid,
/// including every candidate whose score stays below the time-dependent
/// weighted threshold, and returns the smallest interval containing the
/// included candidates. The upper end is `+inf` when the largest grid point
/// is included.
pub fn scp_predict<M: SurvivalModel>(
    calib: &WeightedCalibration,
    survival_model: &M,
    x: &[f64],
    time_grid: &[f64],
) -> Interval {
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut any = false;
    let mut last_included = false;
    for (k, &t) in time_grid.iter().enumerate() {
        let score = float::abs(0.5 - survival_model.cdf(x, t));
        if score <= calib.threshold_at(t) {
            any = true;
            lower = lower.min(t);
            upper = upper.max(t);
            last_included = k == time_grid.len() - 1;
        }
    }
    if !any {
        return Interval::new(0.0, 0.0).unwrap();
    }
    if last_included {
        upper = f64::INFINITY;
    }
    Interval::new(lower.max(0.0), upper).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::conformal_quantile;
    use crate::data::split_dataset;
    use crate::estimators::WeibullAftModel;
    use crate::rng::Seed;
    use alloc::vec;

    #[test]
    fn single_atom() {
        assert_eq!(weighted_quantile(&[5.0], &[1.0], 0.0, 0.3).unwrap(), 5.0);
        assert_eq!(weighted_quantile(&[5.0], &[1.0], 0.0, 0.99).unwrap(), 5.0);
    }

    #[test]
    fn brute_force_four_atom_fixture() {
        // masses 0.2, 0.2, 0.4 at 1,2,3 and 0.2 at +inf;
        // cumulative mass first reaches 0.5 at value 3 (0.2+0.2+0.4)
        let q = weighted_quantile(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0], 1.0, 0.5).unwrap();
        assert_eq!(q, 3.0);
        let q = weighted_quantile(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0], 1.0, 0.85).unwrap();
        assert!(q.is_infinite());
        let q = weighted_quantile(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0], 1.0, 0.15).unwrap();
        assert_eq!(q, 1.0);
    }

    #[test]
    fn uniform_weights_reduce_to_conformal_rank() {
        let scores = [0.3, 0.9, 0.1, 0.5, 0.7, 0.2, 0.8];
        for alpha in [0.1, 0.2, 0.3, 0.5] {
            let wq = weighted_quantile(&scores, &[1.0; 7], 1.0, 1.0 - alpha).unwrap();
            let cq = conformal_quantile(&scores, alpha).unwrap();
            assert_eq!(wq, cq, "alpha {alpha}");
        }
    }

    fn toy_data(censored: bool) -> SurvivalDataset {
        let n = 40;
        let time: Vec<f64> = (1..=n).map(|i| 0.2 + i as f64 / 8.0).collect();
        let event: Vec<bool> = (0..n).map(|i| !censored || i % 4 != 0).collect();
        let x: Vec<f64> = (0..n).map(|i| (i % 7) as f64 / 7.0).collect();
        SurvivalDataset::new(x, 1, time, event).unwrap()
    }

    fn unit_exponential() -> WeibullAftModel {
        WeibullAftModel { intercept: 0.0, beta: vec![0.0], shape: 1.0 }
    }

    #[test]
    fn no_censoring_matches_unweighted_conformal() {
        let data = toy_data(false);
        let split = split_dataset(&data, 0.5, Seed::new(5)).unwrap();
        let model = unit_exponential();
        let calib = scp_calibrate(&data, &split, &model, 0.2).unwrap();
        assert_eq!(calib.dropped, 0);
        let unweighted = conformal_quantile(&calib.cal_scores, 0.2).unwrap();
        let grid = default_time_grid(&data, &split.cal);
        for &t in grid.iter().take(50) {
            assert_eq!(calib.threshold_at(t), unweighted);
        }
    }

    #[test]
    fn threshold_matches_weighted_quantile_oracle() {
        let data = toy_data(true);
        let split = split_dataset(&data, 0.5, Seed::new(5)).unwrap();
        let model = unit_exponential();
        let calib = scp_calibrate(&data, &split, &model, 0.2).unwrap();
        let weights: Vec<f64> = calib
            .cal_times
            .iter()
            .map(|&t| 1.0 / calib.censor_curve.survival_left(t))
            .collect();
        for t in [0.3, 1.0, 2.5, 4.0] {
            let g = calib.censor_curve.survival_left(t);
            if g <= 0.0 {
                continue;
            }
            let oracle =
                weighted_quantile(&calib.cal_scores, &weights, 1.0 / g, 0.8).unwrap();
            assert_eq!(calib.threshold_at(t), oracle, "t = {t}");
        }
    }

    #[test]
    fn included_set_is_an_interval_and_nested_in_alpha() {
        let data = toy_data(true);
        let split = split_dataset(&data, 0.5, Seed::new(9)).unwrap();
        let model = unit_exponential();
        let grid = default_time_grid(&data, &split.cal);
        let mut prev_len = f64::INFINITY;
        for alpha in [0.05, 0.1, 0.2, 0.4] {
            let calib = scp_calibrate(&data, &split, &model, alpha).unwrap();
            let x = [0.5];
            // contiguity of the included set over the grid
            let included: Vec<bool> = grid
                .iter()
                .map(|&t| {
                    float::abs(0.5 - model.cdf(&x, t)) <= calib.threshold_at(t)
                })
                .collect();
            let first = included.iter().position(|&b| b);
            let last = included.iter().rposition(|&b| b);
            if let (Some(f), Some(l)) = (first, last) {
                assert!(included[f..=l].iter().all(|&b| b), "gap at alpha {alpha}");
            }
            let iv = scp_predict(&calib, &model, &x, &grid);
            let len = if iv.upper().is_infinite() {
                f64::INFINITY
            } else {
                iv.length()
            };
            assert!(
                len <= prev_len || (len.is_infinite() && prev_len.is_infinite()),
                "alpha {alpha}: {len} > {prev_len}"
            );
            prev_len = len;
        }
    }

    #[test]
    fn dominant_tail_saturates_to_half_line() {
        let data = toy_data(true);
        let split = split_dataset(&data, 0.5, Seed::new(9)).unwrap();
        let model = unit_exponential();
        let mut calib = scp_calibrate(&data, &split, &model, 0.05).unwrap();
        // force a tiny calibration mass so the tail dominates
        calib.total_weight = 1e-9;
        calib.prefix_weights.iter_mut().for_each(|w| *w *= 1e-12);
        let grid = default_time_grid(&data, &split.cal);
        let iv = scp_predict(&calib, &model, &[0.5], &grid);
        assert!(iv.upper().is_infinite());
        assert!(iv.lower() <= grid[0]);
    }
}
