//! Four-parameter logistic fitting by damped (Levenberg-Marquardt style)
//! nonlinear least squares, and the PLCC built on top of it.

use serde::{Deserialize, Serialize};

use super::correlation::pearson;
use crate::error::{Error, Result};

/// `f(x) = beta2 + (beta1 - beta2) / (1 + exp(-(x - beta3) / |beta4|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl LogisticParams {
    pub fn apply(&self, x: f64) -> f64 {
        let u = (x - self.beta3) / self.beta4.abs();
        let sigma = if u >= 0.0 {
            1.0 / (1.0 + (-u).exp())
        } else {
            let e = u.exp();
            e / (1.0 + e)
        };
        self.beta2 + (self.beta1 - self.beta2) * sigma
    }
}

/// Fit outcome. When the normal equations go singular the fit falls back
/// to the identity mapping and says so.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub fallback_identity: bool,
    pub warning: Option<String>,
    pub sse: f64,
    pub iterations: usize,
}

impl LogisticFit {
    pub fn apply(&self, x: f64) -> f64 {
        if self.fallback_identity {
            x
        } else {
            self.params.apply(x)
        }
    }
}

fn residuals_and_sse(params: &LogisticParams, pred: &[f64], mos: &[f64]) -> (Vec<f64>, f64) {
    let residuals: Vec<f64> = pred.iter().zip(mos).map(|(&x, &y)| y - params.apply(x)).collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    (residuals, sse)
}

/// Solves a 4x4 system by Gaussian elimination with partial pivoting.
/// `None` when the matrix is numerically singular.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in row + 1..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Least-squares fit of the four-parameter logistic.
///
/// Initialization: `beta1 = max(mos)`, `beta2 = min(mos)`,
/// `beta3 = mean(pred)`, `beta4 = std(pred) / 4`. Damped Gauss-Newton
/// iterations until the relative SSE change drops below 1e-10 or 500
/// iterations pass.
pub fn fit_logistic(pred: &[f64], mos: &[f64]) -> Result<LogisticFit> {
    if pred.len() != mos.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", pred.len(), mos.len())));
    }
    if pred.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 points to fit, got {}", pred.len())));
    }
    let n = pred.len() as f64;
    let mean_pred = pred.iter().sum::<f64>() / n;
    let var_pred = pred.iter().map(|&x| (x - mean_pred) * (x - mean_pred)).sum::<f64>() / n;
    if var_pred == 0.0 {
        return Err(Error::invalid("predictions are constant; the fit is undefined"));
    }
    let max_mos = mos.iter().copied().fold(f64::MIN, f64::max);
    let min_mos = mos.iter().copied().fold(f64::MAX, f64::min);

    let mut params = LogisticParams {
        beta1: max_mos,
        beta2: min_mos,
        beta3: mean_pred,
        beta4: (var_pred.sqrt() / 4.0).max(1e-6),
    };
    let mut warning = None;
    if max_mos == min_mos {
        warning = Some("opinion scores are constant; fit is degenerate".into());
    }

    let (mut residuals, mut sse) = residuals_and_sse(&params, pred, mos);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for iter in 0..500 {
        iterations = iter + 1;
        // Jacobian of the residuals r = y - f(x): dr/dbeta = -df/dbeta.
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        let b4 = params.beta4.abs().max(1e-12);
        let sign4 = if params.beta4 >= 0.0 { 1.0 } else { -1.0 };
        for (&x, &r) in pred.iter().zip(&residuals) {
            let u = (x - params.beta3) / b4;
            let sigma = if u >= 0.0 {
                1.0 / (1.0 + (-u).exp())
            } else {
                let e = u.exp();
                e / (1.0 + e)
            };
            let bell = sigma * (1.0 - sigma);
            let df = [
                sigma,                                                 // d f / d beta1
                1.0 - sigma,                                           // d f / d beta2
                -(params.beta1 - params.beta2) * bell / b4,            // d f / d beta3
                -(params.beta1 - params.beta2) * bell * u * sign4 / b4, // d f / d beta4
            ];
            for i in 0..4 {
                jtr[i] += df[i] * r;
                for j in 0..4 {
                    jtj[i][j] += df[i] * df[j];
                }
            }
        }
        // Damped step; retry with a heavier damping on failure.
        let mut accepted = false;
        for _ in 0..20 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(step) = solve4(damped, jtr) else {
                return Ok(LogisticFit {
                    params: LogisticParams { beta1: 1.0, beta2: 0.0, beta3: 0.5, beta4: 1.0 },
                    fallback_identity: true,
                    warning: Some("singular normal equations; using the identity mapping".into()),
                    sse: f64::NAN,
                    iterations,
                });
            };
            let candidate = LogisticParams {
                beta1: params.beta1 + step[0],
                beta2: params.beta2 + step[1],
                beta3: params.beta3 + step[2],
                beta4: params.beta4 + step[3],
            };
            let (cand_res, cand_sse) = residuals_and_sse(&candidate, pred, mos);
            if cand_sse.is_finite() && cand_sse <= sse {
                let improvement = (sse - cand_sse) / sse.max(1e-300);
                params = candidate;
                residuals = cand_res;
                sse = cand_sse;
                lambda = (lambda * 0.5).max(1e-12);
                accepted = true;
                if improvement < 1e-10 {
                    return Ok(LogisticFit { params, fallback_identity: false, warning, sse, iterations });
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !accepted {
            break; // damping exhausted; current params are the best found
        }
    }
    Ok(LogisticFit { params, fallback_identity: false, warning, sse, iterations })
}

/// Pearson correlation between logistic-remapped predictions and opinion
/// scores.
pub fn plcc(pred: &[f64], mos: &[f64]) -> Result<f64> {
    let fit = fit_logistic(pred, mos)?;
    let mapped: Vec<f64> = pred.iter().map(|&x| fit.apply(x)).collect();
    pearson(&mapped, mos)
}
