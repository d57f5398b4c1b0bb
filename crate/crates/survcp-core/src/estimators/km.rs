//! Kaplan-Meier product-limit estimator.

use alloc::vec::Vec;

use crate::data::SurvivalDataset;
use crate::{Error, Result};

/// Right-continuous step estimate of a survival function. `S(0) = 1`; the
/// value drops at each jump time and is constant in between.
#[derive(Debug, Clone, PartialEq)]
pub struct KaplanMeierCurve {
    jump_times: Vec<f64>,
    survival_values: Vec<f64>,
}

impl KaplanMeierCurve {
    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn survival_values(&self) -> &[f64] {
        &self.survival_values
    }

    /// S(t), right-continuous.
    pub fn survival(&self, t: f64) -> f64 {
        // value at the last jump time <= t
        match self.jump_times.partition_point(|&jt| jt <= t) {
            0 => 1.0,
            k => self.survival_values[k - 1],
        }
    }

    /// Left limit S(t-): the value just below t.
    pub fn survival_left(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&jt| jt < t) {
            0 => 1.0,
            k => self.survival_values[k - 1],
        }
    }
}

/// Product-limit estimate with tied times aggregated:
/// `S(t) = prod_{t_i <= t, event} (1 - d_i / n_i)`.
pub fn fit_kaplan_meier(time: &[f64], event: &[bool]) -> Result<KaplanMeierCurve> {
    if time.is_empty() {
        return Err(Error::EmptyInput("kaplan-meier times"));
    }
    if time.len() != event.len() {
        return Err(Error::InvalidData("time/event length mismatch".into()));
    }
    let mut order: Vec<usize> = (0..time.len()).collect();
    order.sort_unstable_by(|&a, &b| time[a].total_cmp(&time[b]));

    let mut jump_times = Vec::new();
    let mut survival_values = Vec::new();
    let mut surv = 1.0;
    let mut at_risk = time.len();
    let mut i = 0;
    while i < order.len() {
        let t = time[order[i]];
        let mut deaths = 0usize;
        let mut removed = 0usize;
        while i < order.len() && time[order[i]] == t {
            if event[order[i]] {
                deaths += 1;
            }
            removed += 1;
            i += 1;
        }
        if deaths > 0 {
            surv *= 1.0 - deaths as f64 / at_risk as f64;
            jump_times.push(t);
            survival_values.push(surv);
        }
        at_risk -= removed;
    }
    Ok(KaplanMeierCurve { jump_times, survival_values })
}

/// Kaplan-Meier estimate of the censoring survival `G(t) = P(C > t)`, fitted
/// on the given rows with flipped indicators: censorings become the events.
pub fn censoring_survival(data: &SurvivalDataset, rows: &[usize]) -> Result<KaplanMeierCurve> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("censoring_survival rows"));
    }
    let time: Vec<f64> = rows.iter().map(|&i| data.time()[i]).collect();
    let flipped: Vec<bool> = rows.iter().map(|&i| !data.event()[i]).collect();
    fit_kaplan_meier(&time, &flipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn no_censoring_gives_empirical_survival() {
        let km = fit_kaplan_meier(&[1.0, 2.0, 3.0], &[true, true, true]).unwrap();
        assert!((km.survival(1.0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((km.survival(2.0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((km.survival(3.0) - 0.0).abs() < 1e-12);
        assert_eq!(km.survival(0.5), 1.0);
    }

    #[test]
    fn hand_computed_product_limit_with_censoring() {
        // risk sets {3,2,1}; censored row at t=2 removes mass without a jump
        let km = fit_kaplan_meier(&[1.0, 2.0, 3.0], &[true, false, true]).unwrap();
        assert!((km.survival(1.0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((km.survival(2.0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((km.survival(3.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn all_censored_is_flat_one() {
        let km = fit_kaplan_meier(&[1.0, 2.0, 3.0], &[false, false, false]).unwrap();
        assert!(km.jump_times().is_empty());
        assert_eq!(km.survival(10.0), 1.0);
    }

    #[test]
    fn ties_are_aggregated() {
        let km = fit_kaplan_meier(&[1.0, 1.0, 2.0, 2.0], &[true, true, true, false]).unwrap();
        assert!((km.survival(1.0) - 0.5).abs() < 1e-12);
        assert!((km.survival(2.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn left_limit_convention() {
        let km = fit_kaplan_meier(&[1.0, 2.0], &[true, true]).unwrap();
        assert_eq!(km.survival_left(1.0), 1.0);
        assert!((km.survival(1.0) - 0.5).abs() < 1e-12);
        assert!((km.survival_left(2.0) - 0.5).abs() < 1e-12);
    }

    fn ds(time: Vec<f64>, event: Vec<bool>) -> SurvivalDataset {
        let n = time.len();
        SurvivalDataset::new(vec![0.0; n], 1, time, event).unwrap()
    }

    #[test]
    fn censoring_survival_flips_indicators() {
        // all deaths -> no censoring events -> G == 1
        let data = ds(vec![1.0, 2.0, 3.0], vec![true, true, true]);
        let g = censoring_survival(&data, &[0, 1, 2]).unwrap();
        assert!(g.jump_times().is_empty());

        // all censored -> empirical survival of the observed times
        let data = ds(vec![1.0, 2.0], vec![false, false]);
        let g = censoring_survival(&data, &[0, 1]).unwrap();
        assert!((g.survival(1.0) - 0.5).abs() < 1e-12);
        assert!((g.survival(2.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn censoring_survival_mixed_six_rows() {
        // times [1,2,2,3,4,5], delta [1,0,0,1,0,1]; flipped events at 2,2,4.
        // t=2: risk 5, d=2 -> 0.6; t=4: risk 2, d=1 -> 0.3.
        let data = ds(
            vec![1.0, 2.0, 2.0, 3.0, 4.0, 5.0],
            vec![true, false, false, true, false, true],
        );
        let g = censoring_survival(&data, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(g.survival(1.5), 1.0);
        assert!((g.survival(2.0) - 0.6).abs() < 1e-12);
        assert!((g.survival(3.9) - 0.6).abs() < 1e-12);
        assert!((g.survival(4.0) - 0.3).abs() < 1e-12);
        assert!((g.survival_left(4.0) - 0.6).abs() < 1e-12);
    }
}
