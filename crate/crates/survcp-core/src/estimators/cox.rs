//! Cox proportional hazards model with Breslow tie handling and the Breslow
//! baseline cumulative hazard.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::SurvivalDataset;
use crate::estimators::{dot, Standardizer, SurvivalModel};
use crate::float;
use crate::linalg::{solve_spd, sup_norm};
use crate::{Error, Result};

const GRAD_TOL: f64 = 1e-8;
// Stall tolerance: when step-halving can no longer improve the
// log-likelihood, accept a gradient sup-norm up to this times (1 + |ll|).
const STALL_GRAD_TOL: f64 = 1e-6;
const MAX_ITER: usize = 100;
const FALLBACK_RIDGE: f64 = 1e-4;

/// Fitted Cox model. The conditional CDF is
/// `F(t | x) = 1 - exp(-Lambda0(t) * exp(x' beta))` with a step-function
/// baseline, so the CDF is flat beyond the largest training time and never
/// reaches 1: candidate times past the observed range cannot be excluded and
/// the generalized inverse returns `+inf` there.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxModel {
    /// Coefficients on the original covariate scale.
    pub beta: Vec<f64>,
    /// Jump times of the baseline cumulative hazard (distinct event times).
    pub baseline_times: Vec<f64>,
    /// Cumulative baseline hazard value at each jump time.
    pub baseline_cumhaz: Vec<f64>,
    pub train_max_time: f64,
}

impl SurvivalModel for CoxModel {
    fn cdf(&self, x: &[f64], t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.baseline_times.partition_point(|&jt| jt <= t);
        if k == 0 {
            return 0.0;
        }
        let cum = self.baseline_cumhaz[k - 1];
        1.0 - float::exp(-cum * float::exp(dot(x, &self.beta)))
    }

    fn inverse_cdf(&self, x: &[f64], u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let target = -float::ln(1.0 - u) / float::exp(dot(x, &self.beta));
        let k = self.baseline_cumhaz.partition_point(|&c| c < target);
        if k == self.baseline_cumhaz.len() {
            f64::INFINITY
        } else {
            self.baseline_times[k]
        }
    }
}

struct PartialLik<'a> {
    // training rows sorted by ascending time
    time: Vec<f64>,
    event: Vec<bool>,
    x: Vec<Vec<f64>>, // standardized covariates
    d: usize,
    ridge: f64,
    _marker: core::marker::PhantomData<&'a ()>,
}

impl PartialLik<'_> {
    /// Breslow-ties partial log-likelihood with gradient and negated Hessian.
    fn eval(&self, beta: &[f64], grad: &mut [f64], neg_hess: &mut [f64]) -> f64 {
        let d = self.d;
        let n = self.time.len();
        grad.iter_mut().for_each(|g| *g = 0.0);
        neg_hess.iter_mut().for_each(|h| *h = 0.0);
        let mut ll = 0.0;

        let eta: Vec<f64> = self.x.iter().map(|xi| dot(xi, beta)).collect();
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; d];
        let mut s2 = vec![0.0; d * d];

        // walk times descending; the risk set accumulates
        let mut i = n;
        while i > 0 {
            let t = self.time[i - 1];
            let mut deaths = 0usize;
            while i > 0 && self.time[i - 1] == t {
                i -= 1;
                let w = float::exp(eta[i]);
                s0 += w;
                for j in 0..d {
                    s1[j] += w * self.x[i][j];
                    for k in 0..d {
                        s2[j * d + k] += w * self.x[i][j] * self.x[i][k];
                    }
                }
                if self.event[i] {
                    deaths += 1;
                    ll += eta[i];
                    for j in 0..d {
                        grad[j] += self.x[i][j];
                    }
                }
            }
            if deaths > 0 {
                let dk = deaths as f64;
                ll -= dk * float::ln(s0);
                for j in 0..d {
                    grad[j] -= dk * s1[j] / s0;
                    for k in 0..d {
                        neg_hess[j * d + k] +=
                            dk * (s2[j * d + k] / s0 - (s1[j] / s0) * (s1[k] / s0));
                    }
                }
            }
        }

        if self.ridge > 0.0 {
            for j in 0..d {
                ll -= 0.5 * self.ridge * beta[j] * beta[j];
                grad[j] -= self.ridge * beta[j];
                neg_hess[j * d + j] += self.ridge;
            }
        }
        ll
    }
}

/// Breslow-ties partial log-likelihood and its gradient at `beta`, on the
/// original covariate scale. Diagnostic entry point for optimizer checks.
pub fn cox_partial_loglik_grad(
    data: &SurvivalDataset,
    train: &[usize],
    beta: &[f64],
) -> (f64, Vec<f64>) {
    let d = data.d();
    let mut order: Vec<usize> = train.to_vec();
    order.sort_unstable_by(|&a, &b| data.time()[a].total_cmp(&data.time()[b]));
    let lik = PartialLik {
        time: order.iter().map(|&i| data.time()[i]).collect(),
        event: order.iter().map(|&i| data.event()[i]).collect(),
        x: order.iter().map(|&i| data.row(i).to_vec()).collect(),
        d,
        ridge: 0.0,
        _marker: core::marker::PhantomData,
    };
    let mut grad = vec![0.0; d];
    let mut neg_hess = vec![0.0; d * d];
    let ll = lik.eval(beta, &mut grad, &mut neg_hess);
    (ll, grad)
}

/// Maximizes the Breslow-ties partial log-likelihood by Newton iterations with
/// step-halving (covariates standardized internally, coefficients reported on
/// the original scale), then computes the Breslow baseline cumulative hazard.
pub fn fit_cox(data: &SurvivalDataset, train: &[usize], ridge: f64) -> Result<CoxModel> {
    let n_events = train.iter().filter(|&&i| data.event()[i]).count();
    if n_events < 2 {
        return Err(Error::InvalidData(
            "fit_cox needs at least 2 events in the training rows".into(),
        ));
    }
    match fit_cox_inner(data, train, ridge) {
        Err(Error::SingularHessian { .. }) if ridge < FALLBACK_RIDGE => {
            fit_cox_inner(data, train, FALLBACK_RIDGE)
        }
        other => other,
    }
}

fn fit_cox_inner(data: &SurvivalDataset, train: &[usize], ridge: f64) -> Result<CoxModel> {
    let std = Standardizer::fit(data, train);
    let d = std.active.len();

    let mut order: Vec<usize> = train.to_vec();
    order.sort_unstable_by(|&a, &b| data.time()[a].total_cmp(&data.time()[b]));
    let mut xs = Vec::with_capacity(order.len());
    let mut buf = Vec::new();
    for &i in &order {
        std.transform(data.row(i), &mut buf);
        xs.push(buf.clone());
    }
    let lik = PartialLik {
        time: order.iter().map(|&i| data.time()[i]).collect(),
        event: order.iter().map(|&i| data.event()[i]).collect(),
        x: xs,
        d,
        ridge,
        _marker: core::marker::PhantomData,
    };

    let mut beta = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut neg_hess = vec![0.0; d * d];
    let mut converged = d == 0;
    if d > 0 {
        let mut ll = lik.eval(&beta, &mut grad, &mut neg_hess);
        for _ in 0..MAX_ITER {
            if sup_norm(&grad) <= GRAD_TOL {
                converged = true;
                break;
            }
            let step = solve_spd(&neg_hess, &grad, d)
                .ok_or(Error::SingularHessian { what: "fit_cox" })?;
            let mut scale = 1.0;
            let mut accepted = false;
            let mut g2 = vec![0.0; d];
            let mut h2 = vec![0.0; d * d];
            for _ in 0..40 {
                let cand: Vec<f64> =
                    beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
                let cand_ll = lik.eval(&cand, &mut g2, &mut h2);
                if cand_ll.is_finite() && cand_ll >= ll {
                    beta = cand;
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
            return Err(Error::NonConvergence { what: "fit_cox", iterations: MAX_ITER });
        }
    }

    let (beta_orig, _) = std.restore(&beta);

    // Breslow baseline on the original scale: at each distinct event time,
    // d_k / sum_{j in risk set} exp(x_j' beta).
    let weights: Vec<f64> = order
        .iter()
        .map(|&i| float::exp(dot(data.row(i), &beta_orig)))
        .collect();
    let mut baseline_times = Vec::new();
    let mut baseline_cumhaz = Vec::new();
    let mut cum = 0.0;
    let mut risk_sum: f64 = weights.iter().sum();
    let mut i = 0;
    while i < order.len() {
        let t = data.time()[order[i]];
        let mut deaths = 0usize;
        let mut removed_weight = 0.0;
        let mut j = i;
        while j < order.len() && data.time()[order[j]] == t {
            if data.event()[order[j]] {
                deaths += 1;
            }
            removed_weight += weights[j];
            j += 1;
        }
        if deaths > 0 {
            cum += deaths as f64 / risk_sum;
            baseline_times.push(t);
            baseline_cumhaz.push(cum);
        }
        risk_sum -= removed_weight;
        i = j;
    }

    let train_max_time = order.last().map(|&i| data.time()[i]).unwrap_or(0.0);
    Ok(CoxModel { beta: beta_orig, baseline_times, baseline_cumhaz, train_max_time })
}
