//! Statistical fitters backing the non-conformity scores: conditional CDF
//! models (Cox PH, Weibull AFT), the Kaplan-Meier curve and a logistic
//! classifier. Each fit is a Newton-type optimization with an explicit
//! gradient-tolerance exit contract.

mod cox;
mod km;
mod logistic;
mod weibull;

pub use cox::{cox_partial_loglik_grad, fit_cox, CoxModel};
pub use km::{censoring_survival, fit_kaplan_meier, KaplanMeierCurve};
pub use logistic::{fit_logistic, logistic_loglik_grad, LogisticModel};
pub use weibull::{fit_weibull_aft, weibull_loglik_grad, WeibullAftModel};

use alloc::vec;
use alloc::vec::Vec;

use crate::data::SurvivalDataset;
use crate::float;

/// Estimated conditional CDF of the survival time given covariates, with
/// generalized-inverse semantics: `inverse_cdf(x, u)` is the smallest `t`
/// attaining CDF mass `u`, or `+inf` when `u` lies above the maximum attained
/// CDF value (non-extrapolating models cannot rule out arbitrarily late
/// survival).
pub trait SurvivalModel {
    fn cdf(&self, x: &[f64], t: f64) -> f64;
    fn inverse_cdf(&self, x: &[f64], u: f64) -> f64;
}

/// Estimate of `P(event = 1 | X = x)`.
pub trait BinaryClassifier {
    fn predict_prob(&self, x: &[f64]) -> f64;
}

impl<M: SurvivalModel + ?Sized> SurvivalModel for &M {
    fn cdf(&self, x: &[f64], t: f64) -> f64 {
        (**self).cdf(x, t)
    }
    fn inverse_cdf(&self, x: &[f64], u: f64) -> f64 {
        (**self).inverse_cdf(x, u)
    }
}

impl<C: BinaryClassifier + ?Sized> BinaryClassifier for &C {
    fn predict_prob(&self, x: &[f64]) -> f64 {
        (**self).predict_prob(x)
    }
}

/// Per-column mean/sd transform fitted on the training rows. Constant columns
/// are dropped from the optimization (their coefficients are zero on the
/// original scale).
pub(crate) struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// Indices of the columns kept in the optimization.
    pub active: Vec<usize>,
    d: usize,
}

impl Standardizer {
    pub fn fit(data: &SurvivalDataset, rows: &[usize]) -> Self {
        let d = data.d();
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for &i in rows {
            for (j, v) in data.row(i).iter().enumerate() {
                mean[j] += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        for &i in rows {
            for (j, v) in data.row(i).iter().enumerate() {
                let c = v - mean[j];
                scale[j] += c * c;
            }
        }
        let mut active = Vec::new();
        for j in 0..d {
            scale[j] = float::sqrt(scale[j] / n);
            if scale[j] > 0.0 {
                active.push(j);
            }
        }
        Standardizer { mean, scale, active, d }
    }

    /// Standardized active-column view of one covariate row.
    pub fn transform(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for &j in &self.active {
            out.push((x[j] - self.mean[j]) / self.scale[j]);
        }
    }

    /// Maps standardized-scale coefficients back to the original scale.
    /// Returns the full-length coefficient vector and the intercept shift
    /// (subtract it from the standardized-scale intercept).
    pub fn restore(&self, beta_std: &[f64]) -> (Vec<f64>, f64) {
        let mut beta = vec![0.0; self.d];
        let mut shift = 0.0;
        for (k, &j) in self.active.iter().enumerate() {
            beta[j] = beta_std[k] / self.scale[j];
            shift += beta_std[k] * self.mean[j] / self.scale[j];
        }
        (beta, shift)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
