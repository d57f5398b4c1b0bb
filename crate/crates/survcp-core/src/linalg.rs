//! Small dense linear algebra for the Newton solvers. Dimensions here are the
//! number of covariates plus a couple of shape parameters, so a plain
//! Cholesky factorization is all that is needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;

/// Solves `A x = b` for symmetric positive-definite `A` (row-major, k x k).
/// Returns `None` when a pivot falls below tolerance (singular or indefinite).
pub fn solve_spd(a: &[f64], b: &[f64], k: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), k * k);
    debug_assert_eq!(b.len(), k);
    let mut l = vec![0.0; k * k];
    let scale = a
        .iter()
        .step_by(k + 1)
        .fold(0.0f64, |m, &v| m.max(float::abs(v)))
        .max(1.0);
    let tol = 1e-12 * scale;
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= tol {
                    return None;
                }
                l[i * k + i] = float::sqrt(s);
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * k + p] * y[p];
        }
        y[i] = s / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in i + 1..k {
            s -= l[p * k + i] * x[p];
        }
        x[i] = s / l[i * k + i];
    }
    Some(x)
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(float::abs(x)))
}
