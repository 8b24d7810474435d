use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{tolerance, Dataset, FitResult, Model};
use crate::convex::{solve_smooth, ConvexObjective, Smoothness, SolveReport};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// `p{(y−t)₊ − y₊} + (1−p){(t−y)₊ − (−y)₊}`; subtracting the `t`-free terms
/// keeps the expectation finite without moment assumptions.
pub fn quantile_check_loss(y: f64, t: f64, p: f64) -> f64 {
    let pos = |v: f64| v.max(0.0);
    p * (pos(y - t) - pos(y)) + (1.0 - p) * (pos(t - y) - pos(-y))
}

fn sorted(y: &[f64]) -> Vec<f64> {
    let mut v = y.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Sample `p`-quantile as the minimiser of the summed check loss.
///
/// With `k = np`: the minimiser is `y_(⌈k⌉)` when `k` is fractional; when `k`
/// is an integer in `1..n` the whole interval `[y_(k), y_(k+1)]` minimises and
/// its midpoint is returned.
pub fn fit_quantile(data: &Dataset, p: f64) -> Result<FitResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("quantile level must lie in (0, 1)"));
    }
    let y = data.continuous_response()?;
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let ys = sorted(y);
    let k = n as f64 * p;
    let nearest = k.round();
    let t = if (k - nearest).abs() <= 1e-9 * n as f64 && nearest >= 1.0 && (nearest as usize) < n {
        let k = nearest as usize;
        0.5 * (ys[k - 1] + ys[k])
    } else {
        let idx = (k.ceil() as usize).clamp(1, n);
        ys[idx - 1]
    };

    let value = y.iter().map(|&yi| quantile_check_loss(yi, t, p)).sum();
    let below = y.iter().filter(|&&v| v < t).count() as f64;
    let at = y.iter().filter(|&&v| v == t).count() as f64;
    let above = n as f64 - below - at;
    // one-sided derivatives of Σ g_p(Y_i, t)
    let left = -p * (above + at) + (1.0 - p) * below;
    let right = -p * above + (1.0 - p) * (below + at);
    let cert = if left > 0.0 {
        left
    } else if right < 0.0 {
        -right
    } else {
        0.0
    };
    let cert = if cert <= 1e-12 * n as f64 { 0.0 } else { cert };
    let solve = SolveReport {
        argmin: Vector::from_element(1, t),
        value,
        certificate_norm: cert,
        iterations: 0,
        converged: cert <= tolerance(n),
        divergence_direction: None,
    };
    Ok(FitResult::new(Model::Quantile { p }, solve))
}

/// `Σ |y_i − t|^α` for `α > 1`. Carries a Hessian only when `α ≥ 2`.
#[derive(Debug, Clone)]
pub struct LAlphaObjective {
    y: Vec<f64>,
    alpha: f64,
}

impl LAlphaObjective {
    pub fn new(y: &[f64], alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::invalid("L_alpha objective needs alpha > 1"));
        }
        if y.is_empty() {
            return Err(Error::EmptyData);
        }
        Ok(LAlphaObjective {
            y: y.to_vec(),
            alpha,
        })
    }
}

impl ConvexObjective for LAlphaObjective {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, beta: &Vector) -> f64 {
        self.y
            .iter()
            .map(|y| (beta[0] - y).abs().powf(self.alpha))
            .sum()
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        let a = self.alpha;
        let g = self
            .y
            .iter()
            .map(|y| {
                let r = beta[0] - y;
                if r == 0.0 {
                    0.0
                } else {
                    a * r.signum() * r.abs().powf(a - 1.0)
                }
            })
            .sum();
        Some(Vector::from_element(1, g))
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        let a = self.alpha;
        if a < 2.0 {
            return None;
        }
        let h = self
            .y
            .iter()
            .map(|y| a * (a - 1.0) * (beta[0] - y).abs().powf(a - 2.0))
            .sum();
        Some(Matrix::from_element(1, 1, h))
    }

    fn smoothness(&self) -> Smoothness {
        if self.alpha >= 2.0 {
            Smoothness::TwiceDifferentiable
        } else {
            Smoothness::OnceDifferentiable
        }
    }
}

/// Minimiser of `Σ|Y_i − t|^α`; `α = 1` is the sample median.
pub fn fit_l_alpha(data: &Dataset, alpha: f64) -> Result<FitResult> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be at least 1"));
    }
    let y = data.continuous_response()?;
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    let model = Model::LAlpha { alpha };
    if alpha == 1.0 {
        let mut fit = fit_quantile(data, 0.5)?;
        fit.solve.value = y.iter().map(|v| (v - fit.beta_hat[0]).abs()).sum();
        fit.model = model;
        return Ok(fit);
    }
    let obj = LAlphaObjective::new(y, alpha)?;
    let solve = solve_smooth(&obj, &Vector::zeros(1), tolerance(y.len()))?;
    Ok(FitResult::new(model, solve))
}

/// Maximum likelihood in the `(2τ)⁻¹exp(−|y−μ|/τ)` family.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleExponentialFit {
    pub mu_hat: f64,
    pub tau_hat: f64,
    /// Log-likelihood at the estimate.
    pub log_likelihood: f64,
}

impl DoubleExponentialFit {
    pub(crate) fn into_fit_result(self) -> FitResult {
        let solve = SolveReport {
            argmin: Vector::from_row_slice(&[self.mu_hat, self.tau_hat]),
            value: -self.log_likelihood,
            certificate_norm: 0.0,
            iterations: 0,
            converged: true,
            divergence_direction: None,
        };
        FitResult::new(Model::DoubleExponential, solve)
    }
}

/// Sample median and mean absolute deviation about it.
pub fn fit_double_exponential(data: &Dataset) -> Result<DoubleExponentialFit> {
    let y = data.continuous_response()?;
    let n = y.len();
    if n < 2 {
        return Err(Error::DegenerateData(
            "double-exponential fit needs at least two observations",
        ));
    }
    let mu = fit_quantile(data, 0.5)?.beta_hat[0];
    let tau = y.iter().map(|v| (v - mu).abs()).sum::<f64>() / n as f64;
    if !(tau > 0.0) {
        return Err(Error::DegenerateData("all observations are equal"));
    }
    let n = n as f64;
    let log_likelihood = -n * (2.0 * tau).ln() - n;
    Ok(DoubleExponentialFit {
        mu_hat: mu,
        tau_hat: tau,
        log_likelihood,
    })
}
