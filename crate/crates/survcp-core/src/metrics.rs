//! Group-wise evaluation: coverage and lengths on synthetic ground truth, and
//! the coverage envelope computable from censored test data.
//!
//! Groups are defined by the finite-vs-infinite upper endpoint of the
//! prediction, not by the classification decision: calibration can produce an
//! infinite upper bound even for points classified as non-censored.

use alloc::vec::Vec;

use crate::data::Prediction;

/// Per-run evaluation summary. Group coverages and lengths are `None` when
/// the corresponding group is empty (never zero, so replication means are not
/// poisoned).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentReport {
    pub n_test: usize,
    /// Fraction of predictions with a finite upper bound.
    pub two_sided_proportion: f64,
    /// Fraction of the infinite-upper group with lower bound below the truth.
    pub coverage_one_sided: Option<f64>,
    /// Fraction of the finite-upper group whose interval contains the truth.
    pub coverage_two_sided: Option<f64>,
    /// Mean lower bound over the one-sided group.
    pub avg_lpb_one_sided: Option<f64>,
    /// Mean interval length over the two-sided group.
    pub avg_length_two_sided: Option<f64>,
    pub cov_lo: Option<f64>,
    pub cov_up: Option<f64>,
}

/// Evaluation against known survival times.
pub fn evaluate_synthetic(predictions: &[Prediction], truth: &[f64]) -> ExperimentReport {
    assert_eq!(predictions.len(), truth.len());
    let n = predictions.len();
    let mut n_two = 0usize;
    let mut covered_two = 0usize;
    let mut covered_one = 0usize;
    let mut len_sum = 0.0;
    let mut lpb_sum = 0.0;
    for (p, &t) in predictions.iter().zip(truth) {
        if p.has_finite_upper() {
            n_two += 1;
            if p.contains(t) {
                covered_two += 1;
            }
            len_sum += p.upper() - p.lower();
        } else {
            if p.lower() <= t {
                covered_one += 1;
            }
            lpb_sum += p.lower();
        }
    }
    let n_one = n - n_two;
    ExperimentReport {
        n_test: n,
        two_sided_proportion: n_two as f64 / n as f64,
        coverage_one_sided: (n_one > 0).then(|| covered_one as f64 / n_one as f64),
        coverage_two_sided: (n_two > 0).then(|| covered_two as f64 / n_two as f64),
        avg_lpb_one_sided: (n_one > 0).then(|| lpb_sum / n_one as f64),
        avg_length_two_sided: (n_two > 0).then(|| len_sum / n_two as f64),
        cov_lo: None,
        cov_up: None,
    }
}

/// Empirical coverage envelope from censored observations.
///
/// `cov_lo = 1 - [P(t_obs not in C, event) + P(!event, classified) +
/// P(t_obs <= LB, !event, !classified)]` and
/// `cov_up = 1 - [P(t_obs not in C, event) + P(t_obs >= sup C1, !event,
/// classified)]`, with probabilities replaced by test-set proportions.
/// `event_class` is passed separately so baselines without a classification
/// step can use the finite-upper indicator.
pub fn evaluate_censored(
    predictions: &[Prediction],
    observed: &[(f64, bool)],
    event_class: &[bool],
) -> (f64, f64) {
    assert_eq!(predictions.len(), observed.len());
    assert_eq!(predictions.len(), event_class.len());
    let n = predictions.len() as f64;
    let mut miss_event = 0usize; // t_obs outside the prediction set, event observed
    let mut censored_classified = 0usize;
    let mut lb_violation = 0usize; // t_obs <= LB, censored, not classified
    let mut beyond_sup = 0usize; // t_obs >= sup C1, censored, classified
    for ((p, &(t, delta)), &klass) in
        predictions.iter().zip(observed).zip(event_class)
    {
        if delta {
            if !p.contains(t) {
                miss_event += 1;
            }
        } else if klass {
            censored_classified += 1;
            if t >= p.upper() {
                beyond_sup += 1;
            }
        } else if t <= p.lower() {
            lb_violation += 1;
        }
    }
    let cov_lo =
        1.0 - (miss_event + censored_classified + lb_violation) as f64 / n;
    let cov_up = 1.0 - (miss_event + beyond_sup) as f64 / n;
    (cov_lo, cov_up)
}

/// Mean and standard deviation over present values; `None` when no
/// replication produced the metric.
pub fn summarize(values: impl IntoIterator<Item = Option<f64>>) -> Option<(f64, f64)> {
    let xs: Vec<f64> = values.into_iter().flatten().collect();
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Some((mean, crate::float::sqrt(var)))
}
