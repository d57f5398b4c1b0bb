//! Split-conformal calibration and the two-sided prediction procedure.
//!
//! Calibration freezes three thresholds:
//! - `q_delta`: conformal quantile of the classifier scores on the censored
//!   calibration rows; a test point is classified as non-censored when its
//!   score reaches it (type-I error on the censored population at `alpha1`).
//! - `q_one`: conformal quantile of the CDF scores `|1/2 - F(t|x)|` on the
//!   non-censored calibration rows; drives the two-sided interval.
//! - `q_lb`: conformal quantile of the one-sided scores `1/2 - F(t|x)` over
//!   the whole calibration set; drives the fallback lower predictive bound.
//!
//! Any threshold saturates to `+inf` when its calibration set is too small,
//! which keeps the procedure valid (intervals widen, the classifier defaults
//! to "censored").

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{Interval, Prediction, SplitIndices, SurvivalDataset};
use crate::estimators::{BinaryClassifier, SurvivalModel};
use crate::float;
use crate::{Error, Result};

/// The split-conformal quantile: the k-th smallest score with
/// `k = ceil((1 - alpha_level) * (m + 1))`, or `+inf` when `k > m`.
pub fn conformal_quantile(scores: &[f64], alpha_level: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("conformal_quantile scores"));
    }
    let m = scores.len();
    let k = float::ceil((1.0 - alpha_level) * (m as f64 + 1.0)) as usize;
    if k > m {
        return Ok(f64::INFINITY);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[k.max(1) - 1])
}

/// Rank-based conformal p-value, counting calibration scores weakly above the
/// test score. Super-uniform under exchangeability.
pub fn conformal_p_value(cal_scores: &[f64], test_score: f64) -> f64 {
    let above = cal_scores.iter().filter(|&&s| s >= test_score).count();
    (1.0 + above as f64) / (1.0 + cal_scores.len() as f64)
}

/// Frozen thresholds plus the fitted models; immutable and shareable across
/// threads for prediction.
#[derive(Debug, Clone)]
pub struct CalibratedPredictor<M, C> {
    pub alpha: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub q_delta: f64,
    pub q_one: f64,
    pub q_lb: f64,
    pub survival_model: M,
    pub classifier: C,
    pub warnings: Vec<String>,
}

/// Computes the three score vectors on the calibration strata and freezes
/// their conformal quantiles. `alpha1 = alpha * alpha_split`,
/// `alpha0 = alpha * (1 - alpha_split)`; the default split is 1/2.
///
/// Empty calibration strata are reported as warnings with saturated
/// thresholds rather than errors: the resulting predictor stays valid, it is
/// just uninformative on the affected branch.
pub fn calibrate<M: SurvivalModel, C: BinaryClassifier>(
    data: &SurvivalDataset,
    split: &SplitIndices,
    survival_model: M,
    classifier: C,
    alpha: f64,
    alpha_split: f64,
) -> Result<CalibratedPredictor<M, C>> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} not in (0,1)")));
    }
    if !(0.0 < alpha_split && alpha_split < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha_split {alpha_split} not in (0,1)"
        )));
    }
    let alpha1 = alpha * alpha_split;
    let alpha0 = alpha * (1.0 - alpha_split);
    let mut warnings = Vec::new();

    // classifier scores on the censored stratum: nu_Delta(x, 0) = 1 - pi_0(x)
    let q_delta = if split.cal0.is_empty() {
        warnings.push(String::from("degenerate calibration: cal0 empty"));
        f64::INFINITY
    } else {
        let scores: Vec<f64> = split
            .cal0
            .iter()
            .map(|&i| classifier.predict_prob(data.row(i)))
            .collect();
        conformal_quantile(&scores, alpha1)?
    };

    // CDF scores on the non-censored stratum: |1/2 - F(t|x)|
    let q_one = if split.cal1.is_empty() {
        warnings.push(String::from("degenerate calibration: cal1 empty"));
        f64::INFINITY
    } else {
        let scores: Vec<f64> = split
            .cal1
            .iter()
            .map(|&i| {
                float::abs(0.5 - survival_model.cdf(data.row(i), data.time()[i]))
            })
            .collect();
        conformal_quantile(&scores, alpha1)?
    };

    // one-sided scores over the whole calibration set: 1/2 - F(t|x)
    let q_lb = if split.cal.is_empty() {
        warnings.push(String::from("degenerate calibration: cal empty"));
        f64::INFINITY
    } else {
        let scores: Vec<f64> = split
            .cal
            .iter()
            .map(|&i| 0.5 - survival_model.cdf(data.row(i), data.time()[i]))
            .collect();
        conformal_quantile(&scores, alpha0)?
    };

    Ok(CalibratedPredictor {
        alpha,
        alpha0,
        alpha1,
        q_delta,
        q_one,
        q_lb,
        survival_model,
        classifier,
        warnings,
    })
}

impl<M: SurvivalModel, C: BinaryClassifier> CalibratedPredictor<M, C> {
    /// Classification of the event status: true when the classifier score
    /// reaches the calibrated threshold. With a saturated threshold every
    /// point is classified as censored, preserving validity.
    pub fn classify_event(&self, x: &[f64]) -> bool {
        self.classifier.predict_prob(x) >= self.q_delta
    }

    /// Two-sided interval from the CDF score:
    /// `[F^{-1}(1/2 - q_one), F^{-1}(1/2 + q_one)]`, with the upper endpoint
    /// infinite when the candidate mass exceeds the maximum attained CDF.
    pub fn two_sided_interval(&self, x: &[f64]) -> Interval {
        let lo_u = (0.5 - self.q_one).max(0.0);
        let hi_u = (0.5 + self.q_one).min(1.0);
        let lower = self.survival_model.inverse_cdf(x, lo_u).max(0.0);
        let upper = self.survival_model.inverse_cdf(x, hi_u);
        Interval::new(lower.min(upper), upper).expect("cdf inversion produced ordered bounds")
    }

    /// Naive lower predictive bound at level `alpha0`, clipped to 0 when the
    /// calibrated mass argument is non-positive.
    pub fn naive_lpb(&self, x: &[f64]) -> f64 {
        let u = 0.5 - self.q_lb;
        if u <= 0.0 {
            0.0
        } else {
            self.survival_model.inverse_cdf(x, u).max(0.0)
        }
    }

    /// Full prediction: two-sided interval when the point is classified as
    /// conforming to the non-censored population, otherwise a lower bound.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        if self.classify_event(x) {
            Prediction::TwoSided(self.two_sided_interval(x))
        } else {
            Prediction::LowerOnly(self.naive_lpb(x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::split_dataset;
    use crate::estimators::WeibullAftModel;
    use crate::rng::Seed;
    use alloc::vec;

    struct ConstProb(f64);
    impl BinaryClassifier for ConstProb {
        fn predict_prob(&self, _x: &[f64]) -> f64 {
            self.0
        }
    }

    fn unit_exponential() -> WeibullAftModel {
        WeibullAftModel { intercept: 0.0, beta: vec![0.0], shape: 1.0 }
    }

    #[test]
    fn quantile_direct_formula() {
        let scores: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        assert_eq!(conformal_quantile(&scores, 0.1).unwrap(), 9.0);
        assert_eq!(conformal_quantile(&[1.0, 2.0, 3.0, 4.0], 0.2).unwrap(), 4.0);
        assert!(conformal_quantile(&[1.0, 2.0, 3.0], 0.1).unwrap().is_infinite());
        assert!(conformal_quantile(&[], 0.1).is_err());
    }

    #[test]
    fn p_value_direct_count() {
        let cal = [0.1, 0.2, 0.3];
        assert!((conformal_p_value(&cal, 0.4) - 0.25).abs() < 1e-12);
        assert!((conformal_p_value(&cal, 0.0) - 1.0).abs() < 1e-12);
        assert_eq!(conformal_p_value(&[], 0.7), 1.0);
    }

    #[test]
    fn p_value_rule_matches_threshold_rule() {
        // without ties (and alpha1 * (m+1) not an integer),
        // [score >= q_delta] == [p-value < alpha1]
        let cal: Vec<f64> = [0.11, 0.32, 0.55, 0.61, 0.74, 0.83, 0.92, 0.15, 0.27]
            .to_vec();
        let alpha1 = 0.25;
        let q = conformal_quantile(&cal, alpha1).unwrap();
        for test in [0.05, 0.2, 0.5, 0.6, 0.8, 0.84, 0.9, 0.95, 1.0] {
            let by_threshold = test >= q;
            let by_p = conformal_p_value(&cal, test) < alpha1;
            assert_eq!(by_threshold, by_p, "test score {test}");
        }
    }

    #[test]
    fn saturated_q_delta_never_classifies_event() {
        let data = toy_data();
        let split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let mut p =
            calibrate(&data, &split, unit_exponential(), ConstProb(1.0), 0.1, 0.5).unwrap();
        p.q_delta = f64::INFINITY;
        assert!(!p.classify_event(&[0.3]));
        assert!(!p.predict(&[0.3]).event_class());
    }

    #[test]
    fn strong_score_classifies_event() {
        // scores all <= 0.5 on cal0, test score 1.0, large cal0
        let scores = vec![0.5; 100];
        let q = conformal_quantile(&scores, 0.05).unwrap();
        assert!(1.0 >= q);
    }

    #[test]
    fn two_sided_closed_form_exponential() {
        let data = toy_data();
        let split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let mut p =
            calibrate(&data, &split, unit_exponential(), ConstProb(0.5), 0.1, 0.5).unwrap();
        p.q_one = 0.4;
        let iv = p.two_sided_interval(&[0.0]);
        assert!((iv.lower() - 0.105360516).abs() < 1e-5);
        assert!((iv.upper() - 2.302585093).abs() < 1e-5);
    }

    #[test]
    fn saturated_q_one_covers_half_line() {
        let data = toy_data();
        let split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let mut p =
            calibrate(&data, &split, unit_exponential(), ConstProb(0.5), 0.1, 0.5).unwrap();
        p.q_one = 0.6;
        let iv = p.two_sided_interval(&[0.0]);
        assert_eq!(iv.lower(), 0.0);
        assert!(iv.upper().is_infinite());
    }

    #[test]
    fn lpb_closed_form_and_clipping() {
        let data = toy_data();
        let split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let mut p =
            calibrate(&data, &split, unit_exponential(), ConstProb(0.5), 0.1, 0.5).unwrap();
        p.q_lb = 0.3;
        assert!((p.naive_lpb(&[0.0]) - 0.223143551).abs() < 1e-5);
        p.q_lb = 0.5;
        assert_eq!(p.naive_lpb(&[0.0]), 0.0);
        p.q_lb = 0.8;
        assert_eq!(p.naive_lpb(&[0.0]), 0.0);
    }

    fn toy_data() -> SurvivalDataset {
        let n = 20;
        let time: Vec<f64> = (1..=n).map(|i| i as f64 / 4.0).collect();
        let event: Vec<bool> = (0..n).map(|i| i % 3 != 0).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64) / n as f64).collect();
        SurvivalDataset::new(x, 1, time, event).unwrap()
    }

    #[test]
    fn default_split_halves_alpha() {
        let data = toy_data();
        let split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let p = calibrate(&data, &split, unit_exponential(), ConstProb(0.5), 0.1, 0.5).unwrap();
        assert!((p.alpha0 - 0.05).abs() < 1e-15);
        assert!((p.alpha1 - 0.05).abs() < 1e-15);
    }

    #[test]
    fn tiny_cal1_saturates_interval() {
        // |cal1| = 3, alpha1 = 0.05 -> k = 4 > 3 -> +inf
        let q = conformal_quantile(&[0.1, 0.2, 0.3], 0.05).unwrap();
        assert!(q.is_infinite());
    }

    #[test]
    fn calibration_deterministic() {
        let data = toy_data();
        let split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let a = calibrate(&data, &split, unit_exponential(), ConstProb(0.4), 0.1, 0.5).unwrap();
        let b = calibrate(&data, &split, unit_exponential(), ConstProb(0.4), 0.1, 0.5).unwrap();
        assert_eq!((a.q_delta, a.q_one, a.q_lb), (b.q_delta, b.q_one, b.q_lb));
    }

    #[test]
    fn empty_cal0_warns_and_saturates() {
        // every event observed -> cal0 empty after any split
        let n = 12;
        let time: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let data =
            SurvivalDataset::new(vec![0.0; n], 1, time, vec![true; n]).unwrap();
        let split = split_dataset(&data, 0.5, Seed::new(1)).unwrap();
        let p = calibrate(&data, &split, unit_exponential(), ConstProb(0.9), 0.1, 0.5).unwrap();
        assert!(p.q_delta.is_infinite());
        assert!(p
            .warnings
            .iter()
            .any(|w| w == "degenerate calibration: cal0 empty"));
        assert!(!p.classify_event(&[0.0]));
    }

    #[test]
    fn permuting_calibration_rows_leaves_thresholds_unchanged() {
        let data = toy_data();
        let mut split = split_dataset(&data, 0.5, Seed::new(3)).unwrap();
        let a = calibrate(&data, &split, unit_exponential(), ConstProb(0.4), 0.1, 0.5).unwrap();
        split.cal.reverse();
        split.cal0.reverse();
        split.cal1.reverse();
        let b = calibrate(&data, &split, unit_exponential(), ConstProb(0.4), 0.1, 0.5).unwrap();
        assert_eq!((a.q_delta, a.q_one, a.q_lb), (b.q_delta, b.q_one, b.q_lb));
    }

    #[test]
    fn quantile_nesting_in_alpha() {
        let scores: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let mut prev = f64::INFINITY;
        for a in [0.01, 0.05, 0.1, 0.2, 0.5] {
            let q = conformal_quantile(&scores, a).unwrap();
            assert!(q <= prev);
            prev = q;
        }
    }
}
