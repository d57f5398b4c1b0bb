//! Weibull accelerated failure time model, fitted by maximizing the censored
//! log-likelihood over (intercept, coefficients, log shape).

use alloc::vec;
use alloc::vec::Vec;

use crate::data::SurvivalDataset;
use crate::estimators::{dot, Standardizer, SurvivalModel};
use crate::float;
use crate::linalg::{solve_spd, sup_norm};
use crate::{Error, Result};

const GRAD_TOL: f64 = 1e-8;
// When the line search can no longer improve the log-likelihood (the Newton
// gain has fallen below f64 resolution of ll), accept a gradient sup-norm up
// to this factor times (1 + |ll|); the induced parameter error is orders of
// magnitude below the reporting precision.
const STALL_GRAD_TOL: f64 = 1e-6;
const MAX_ITER: usize = 200;

/// Fitted Weibull AFT model:
/// `F(t | x) = 1 - exp(-(t / lambda(x))^rho)` with
/// `lambda(x) = exp(intercept + x' beta)`. The CDF attains every `u < 1` at a
/// finite time (parametric extrapolation), so the generalized inverse is
/// finite except at `u >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeibullAftModel {
    pub intercept: f64,
    /// Coefficients on the original covariate scale.
    pub beta: Vec<f64>,
    /// Shape parameter rho.
    pub shape: f64,
}

impl WeibullAftModel {
    fn log_scale(&self, x: &[f64]) -> f64 {
        self.intercept + dot(x, &self.beta)
    }
}

impl SurvivalModel for WeibullAftModel {
    fn cdf(&self, x: &[f64], t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let z = float::exp(self.shape * (float::ln(t) - self.log_scale(x)));
        1.0 - float::exp(-z)
    }

    fn inverse_cdf(&self, x: &[f64], u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        float::exp(self.log_scale(x) + float::ln(-float::ln(1.0 - u)) / self.shape)
    }
}

struct CensoredLik {
    log_t: Vec<f64>,
    event: Vec<bool>,
    x: Vec<Vec<f64>>, // standardized
    d: usize,
}

impl CensoredLik {
    /// Log-likelihood with gradient and negated Hessian over
    /// theta = (intercept, beta..., gamma) with rho = exp(gamma).
    fn eval(&self, theta: &[f64], grad: &mut [f64], neg_hess: &mut [f64]) -> f64 {
        let d = self.d;
        let k = d + 2; // intercept, beta, gamma
        grad.iter_mut().for_each(|g| *g = 0.0);
        neg_hess.iter_mut().for_each(|h| *h = 0.0);
        let gamma = theta[k - 1];
        let rho = float::exp(gamma);
        let mut ll = 0.0;
        let mut xt = vec![0.0; k - 1]; // (1, x) design row

        for i in 0..self.log_t.len() {
            xt[0] = 1.0;
            xt[1..].copy_from_slice(&self.x[i]);
            let eta = theta[..k - 1]
                .iter()
                .zip(&xt)
                .map(|(a, b)| a * b)
                .sum::<f64>();
            let u = rho * (self.log_t[i] - eta);
            let z = float::exp(u);
            let delta = if self.event[i] { 1.0 } else { 0.0 };
            ll += delta * (gamma - rho * eta + (rho - 1.0) * self.log_t[i]) - z;

            // d ll / d eta_i = rho (z - delta); d ll / d gamma contribution
            let geta = rho * (z - delta);
            for j in 0..k - 1 {
                grad[j] += geta * xt[j];
            }
            grad[k - 1] += delta * (1.0 + u) - z * u;

            // negated Hessian blocks
            let hee = rho * rho * z; // -d2/deta2
            let heg = -(rho * (z - delta) + rho * z * u); // -d2/(deta dgamma)
            let hgg = -(delta * u - z * u * (1.0 + u)); // -d2/dgamma2
            for j in 0..k - 1 {
                for m in 0..k - 1 {
                    neg_hess[j * k + m] += hee * xt[j] * xt[m];
                }
                neg_hess[j * k + (k - 1)] += heg * xt[j];
                neg_hess[(k - 1) * k + j] += heg * xt[j];
            }
            neg_hess[(k - 1) * k + (k - 1)] += hgg;
        }
        ll
    }
}

/// Censored log-likelihood and gradient at `(intercept, beta, log shape)`,
/// on the original covariate scale. Diagnostic entry point for optimizer
/// checks; the gradient is over `(intercept, beta..., log shape)`.
pub fn weibull_loglik_grad(
    data: &SurvivalDataset,
    train: &[usize],
    intercept: f64,
    beta: &[f64],
    log_shape: f64,
) -> (f64, Vec<f64>) {
    let d = data.d();
    let k = d + 2;
    let lik = CensoredLik {
        log_t: train.iter().map(|&i| float::ln(data.time()[i])).collect(),
        event: train.iter().map(|&i| data.event()[i]).collect(),
        x: train.iter().map(|&i| data.row(i).to_vec()).collect(),
        d,
    };
    let mut theta = vec![0.0; k];
    theta[0] = intercept;
    theta[1..k - 1].copy_from_slice(beta);
    theta[k - 1] = log_shape;
    let mut grad = vec![0.0; k];
    let mut neg_hess = vec![0.0; k * k];
    let ll = lik.eval(&theta, &mut grad, &mut neg_hess);
    (ll, grad)
}

/// Maximizes the right-censored Weibull AFT log-likelihood by Newton with
/// step-halving; exits when the gradient sup-norm drops to 1e-8 (or the line
/// search stalls with a near-zero scaled gradient).
pub fn fit_weibull_aft(data: &SurvivalDataset, train: &[usize]) -> Result<WeibullAftModel> {
    let n_events = train.iter().filter(|&&i| data.event()[i]).count();
    if n_events < 2 {
        return Err(Error::InvalidData(
            "fit_weibull_aft needs at least 2 events in the training rows".into(),
        ));
    }
    let std = Standardizer::fit(data, train);
    let d = std.active.len();
    let k = d + 2;

    let mut xs = Vec::with_capacity(train.len());
    let mut buf = Vec::new();
    for &i in train {
        std.transform(data.row(i), &mut buf);
        xs.push(buf.clone());
    }
    let lik = CensoredLik {
        log_t: train.iter().map(|&i| float::ln(data.time()[i])).collect(),
        event: train.iter().map(|&i| data.event()[i]).collect(),
        x: xs,
        d,
    };

    // start at the mean log time with unit shape
    let mut theta = vec![0.0; k];
    theta[0] = lik.log_t.iter().sum::<f64>() / lik.log_t.len() as f64;

    let mut grad = vec![0.0; k];
    let mut neg_hess = vec![0.0; k * k];
    let mut ll = lik.eval(&theta, &mut grad, &mut neg_hess);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        if sup_norm(&grad) <= GRAD_TOL {
            converged = true;
            break;
        }
        // damp the Hessian if the factorization fails far from the optimum
        let mut step = None;
        let mut tau = 0.0;
        for _ in 0..12 {
            let mut h = neg_hess.clone();
            if tau > 0.0 {
                for j in 0..k {
                    h[j * k + j] += tau;
                }
            }
            if let Some(s) = solve_spd(&h, &grad, k) {
                step = Some(s);
                break;
            }
            tau = if tau == 0.0 { 1e-6 } else { tau * 100.0 };
        }
        let step = step.ok_or(Error::SingularHessian { what: "fit_weibull_aft" })?;

        let mut scale = 1.0;
        let mut accepted = false;
        let mut g2 = vec![0.0; k];
        let mut h2 = vec![0.0; k * k];
        for _ in 0..50 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            let cand_ll = lik.eval(&cand, &mut g2, &mut h2);
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
        return Err(Error::NonConvergence { what: "fit_weibull_aft", iterations: MAX_ITER });
    }

    let (beta_orig, shift) = std.restore(&theta[1..k - 1]);
    Ok(WeibullAftModel {
        intercept: theta[0] - shift,
        beta: beta_orig,
        shape: float::exp(theta[k - 1]),
    })
}
