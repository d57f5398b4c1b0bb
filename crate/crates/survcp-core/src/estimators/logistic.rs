//! Logistic regression via iteratively reweighted least squares.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::SurvivalDataset;
use crate::estimators::{dot, BinaryClassifier, Standardizer};
use crate::float;
use crate::linalg::{solve_spd, sup_norm};
use crate::{Error, Result};

const GRAD_TOL: f64 = 1e-8;
// Stall tolerance: when step-halving can no longer improve the
// log-likelihood, accept a gradient sup-norm up to this times (1 + |ll|).
const STALL_GRAD_TOL: f64 = 1e-6;
const MAX_ITER: usize = 100;
const FALLBACK_RIDGE: f64 = 1e-4;
const SEPARATION_NORM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    /// Coefficients on the original covariate scale.
    pub beta: Vec<f64>,
    /// True when perfect separation forced the ridge fallback.
    pub ridged: bool,
}

impl BinaryClassifier for LogisticModel {
    fn predict_prob(&self, x: &[f64]) -> f64 {
        sigmoid(self.intercept + dot(x, &self.beta))
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + float::exp(-eta))
    } else {
        let e = float::exp(eta);
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood and gradient at `(intercept, beta)`, on the
/// original covariate scale. Diagnostic entry point for optimizer checks;
/// the gradient is over `(intercept, beta...)`.
pub fn logistic_loglik_grad(
    data: &SurvivalDataset,
    train: &[usize],
    labels: &[bool],
    intercept: f64,
    beta: &[f64],
) -> (f64, Vec<f64>) {
    let mut ll = 0.0;
    let mut grad = vec![0.0; data.d() + 1];
    for &i in train {
        let x = data.row(i);
        let eta = intercept + dot(x, beta);
        let y = if labels[i] { 1.0 } else { 0.0 };
        ll += y * eta - if eta > 30.0 { eta } else { float::ln(1.0 + float::exp(eta)) };
        let r = y - sigmoid(eta);
        grad[0] += r;
        for j in 0..x.len() {
            grad[j + 1] += r * x[j];
        }
    }
    (ll, grad)
}

/// Unpenalized maximum likelihood via IRLS; on diverging coefficients
/// (perfect separation) the fit falls back to a small ridge and flags it.
pub fn fit_logistic(
    data: &SurvivalDataset,
    train: &[usize],
    labels: &[bool],
) -> Result<LogisticModel> {
    let pos = train.iter().filter(|&&i| labels[i]).count();
    if pos == 0 || pos == train.len() {
        return Err(Error::InvalidData(
            "fit_logistic needs both classes among the training rows".into(),
        ));
    }
    match fit_inner(data, train, labels, 0.0) {
        Ok(m) => Ok(m),
        Err(Error::SingularHessian { .. }) | Err(Error::NonConvergence { .. }) => {
            let mut m = fit_inner(data, train, labels, FALLBACK_RIDGE)?;
            m.ridged = true;
            Ok(m)
        }
        Err(e) => Err(e),
    }
}

fn fit_inner(
    data: &SurvivalDataset,
    train: &[usize],
    labels: &[bool],
    ridge: f64,
) -> Result<LogisticModel> {
    let std = Standardizer::fit(data, train);
    let d = std.active.len();
    let k = d + 1;

    let mut xs = Vec::with_capacity(train.len());
    let mut buf = Vec::new();
    for &i in train {
        std.transform(data.row(i), &mut buf);
        xs.push(buf.clone());
    }
    let y: Vec<f64> = train.iter().map(|&i| if labels[i] { 1.0 } else { 0.0 }).collect();

    let eval = |theta: &[f64], grad: &mut [f64], neg_hess: &mut [f64]| -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        neg_hess.iter_mut().for_each(|h| *h = 0.0);
        let mut ll = 0.0;
        let mut xt = vec![0.0; k];
        for (xi, &yi) in xs.iter().zip(&y) {
            xt[0] = 1.0;
            xt[1..].copy_from_slice(xi);
            let eta: f64 = theta.iter().zip(&xt).map(|(a, b)| a * b).sum();
            let p = sigmoid(eta);
            // log-likelihood, numerically safe form
            ll += yi * eta - if eta > 30.0 { eta } else { float::ln(1.0 + float::exp(eta)) };
            let r = yi - p;
            let w = p * (1.0 - p);
            for j in 0..k {
                grad[j] += r * xt[j];
                for m in 0..k {
                    neg_hess[j * k + m] += w * xt[j] * xt[m];
                }
            }
        }
        // ridge on the slope coefficients only
        for j in 1..k {
            ll -= 0.5 * ridge * theta[j] * theta[j];
            grad[j] -= ridge * theta[j];
            neg_hess[j * k + j] += ridge;
        }
        ll
    };

    let mut theta = vec![0.0; k];
    let mut grad = vec![0.0; k];
    let mut neg_hess = vec![0.0; k * k];
    let mut ll = eval(&theta, &mut grad, &mut neg_hess);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        if sup_norm(&grad) <= GRAD_TOL {
            converged = true;
            break;
        }
        if ridge == 0.0 && sup_norm(&theta[1..]) > SEPARATION_NORM {
            return Err(Error::NonConvergence { what: "fit_logistic", iterations: MAX_ITER });
        }
        let step = solve_spd(&neg_hess, &grad, k)
            .ok_or(Error::SingularHessian { what: "fit_logistic" })?;
        let mut scale = 1.0;
        let mut accepted = false;
        let mut g2 = vec![0.0; k];
        let mut h2 = vec![0.0; k * k];
        for _ in 0..40 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            let cand_ll = eval(&cand, &mut g2, &mut h2);
            if cand_ll.is_finite() && cand_ll >= ll {
                theta = cand;
                ll = cand_ll;
                grad.copy_from_slice(&g2);
                neg_hess.copy_from_slice(&h2);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !converged && sup_norm(&grad) > STALL_GRAD_TOL * (1.0 + float::abs(ll)) {
        return Err(Error::NonConvergence { what: "fit_logistic", iterations: MAX_ITER });
    }

    let (beta_orig, shift) = std.restore(&theta[1..]);
    Ok(LogisticModel { intercept: theta[0] - shift, beta: beta_orig, ridged: false })
}
