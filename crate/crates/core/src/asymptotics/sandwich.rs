use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    Baseline, CoxObjective, Dataset, ExpHazardObjective, MarkovPlObjective, Model,
};
use crate::linalg::{inverse_spd, is_positive_definite, symmetrize, weighted_gram, Matrix, Vector};
use crate::special::{logistic, normal_pdf};

/// Source of the score-variability matrix `K_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variability {
    /// Model-based: `K_n = J_n` for likelihood fits, known-variance forms
    /// otherwise.
    Model,
    /// Empirical outer products of per-observation scores.
    Robust,
}

impl Variability {
    /// Likelihood fits default to the model form, M-estimators to the
    /// empirical one.
    pub fn default_for(model: &Model) -> Self {
        match model {
            Model::Logistic | Model::Poisson | Model::Cox | Model::ExpHazard { .. } => {
                Variability::Model
            }
            _ => Variability::Robust,
        }
    }
}

/// `J_n`, `K_n`, `L_n` as sums over observations; the estimator's
/// covariance is approximately `J_n⁻¹ (K_n + L_n) J_n⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCovariance {
    pub j: Matrix,
    pub k: Matrix,
    pub l: Matrix,
    pub n: usize,
    pub variability: Variability,
    /// Kernel bandwidth when `J_n` involves a density estimate.
    pub bandwidth: Option<f64>,
    /// How `J_n` and `K_n` were formed.
    pub method: &'static str,
}

impl SandwichCovariance {
    fn new(j: Matrix, k: Matrix, n: usize, variability: Variability, method: &'static str) -> Self {
        let p = j.nrows();
        SandwichCovariance {
            j: symmetrize(&j),
            k: symmetrize(&k),
            l: Matrix::zeros(p, p),
            n,
            variability,
            bandwidth: None,
            method,
        }
    }

    /// `(J_n/n)⁻¹ ((K_n+L_n)/n) (J_n/n)⁻¹ / n`.
    pub fn assembled(&self) -> Result<Matrix> {
        if !is_positive_definite(&self.j) {
            return Err(Error::SingularInformation);
        }
        let n = self.n as f64;
        let ji = inverse_spd(&(&self.j / n))?;
        Ok(symmetrize(&(&ji * ((&self.k + &self.l) / n) * &ji / n)))
    }

    /// Limit covariance of `√n (β̂ − β₀)`.
    pub fn scaled(&self) -> Result<Matrix> {
        Ok(self.assembled()? * self.n as f64)
    }
}

/// Silverman's rule `1.06 σ̂ n^{-1/5}`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// Gaussian kernel density of `values` at `at`, Silverman bandwidth.
pub fn kernel_density(values: &[f64], at: f64) -> Result<(f64, f64)> {
    let h = silverman_bandwidth(values);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::SingularInformation);
    }
    let f =
        values.iter().map(|v| normal_pdf((at - v) / h)).sum::<f64>() / (values.len() as f64 * h);
    Ok((f, h))
}

fn sign(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.signum()
    }
}

fn scalar(v: f64) -> Matrix {
    Matrix::from_element(1, 1, v)
}

fn outer_sum(x: &Matrix, scores: impl Iterator<Item = f64>) -> Matrix {
    weighted_gram(x, scores.map(|s| s * s))
}

/// Sandwich ingredients for `model` at `beta_hat`, with the default
/// [`Variability`] for that model.
pub fn sandwich_for(
    model: &Model,
    data: &Dataset,
    beta_hat: &Vector,
) -> Result<SandwichCovariance> {
    sandwich_with(model, data, beta_hat, Variability::default_for(model))
}

pub fn sandwich_with(
    model: &Model,
    data: &Dataset,
    beta_hat: &Vector,
    variability: Variability,
) -> Result<SandwichCovariance> {
    let n = data.len();
    let robust = variability == Variability::Robust;
    let mut out = match *model {
        Model::Quantile { p } => {
            let y = data.continuous_response()?;
            let t = beta_hat[0];
            let resid: Vec<f64> = y.iter().map(|v| v - t).collect();
            let (f, h) = kernel_density(&resid, 0.0)?;
            let k = if robust {
                resid
                    .iter()
                    .map(|r| if *r < 0.0 { p - 1.0 } else { p })
                    .map(|s| s * s)
                    .sum()
            } else {
                n as f64 * p * (1.0 - p)
            };
            let mut s = SandwichCovariance::new(
                scalar(n as f64 * f),
                scalar(k),
                n,
                variability,
                "kernel density at the quantile",
            );
            s.bandwidth = Some(h);
            s
        }
        Model::LAlpha { alpha: 1.0 } => {
            let mut s = sandwich_with(&Model::Quantile { p: 0.5 }, data, beta_hat, variability)?;
            s.j *= 2.0;
            s.k *= 4.0;
            return Ok(s);
        }
        Model::LAlpha { alpha } => {
            let y = data.continuous_response()?;
            let t = beta_hat[0];
            let j: f64 = y
                .iter()
                .map(|v| alpha * (alpha - 1.0) * (v - t).abs().powf(alpha - 2.0))
                .sum();
            let k: f64 = y
                .iter()
                .map(|v| alpha * alpha * (v - t).abs().powf(2.0 * alpha - 2.0))
                .sum();
            if !j.is_finite() {
                return Err(Error::SingularInformation);
            }
            SandwichCovariance::new(
                scalar(j),
                scalar(k),
                n,
                Variability::Robust,
                "plug-in moments of |residual|",
            )
        }
        Model::Ols => {
            let x = data.covariates();
            let resid = Vector::from_row_slice(data.continuous_response()?) - x * beta_hat;
            let j = x.transpose() * x;
            let k = if robust {
                outer_sum(x, resid.iter().copied())
            } else {
                let dof = (n as f64 - x.ncols() as f64).max(1.0);
                &j * (resid.norm_squared() / dof)
            };
            SandwichCovariance::new(j, k, n, variability, "least squares; K+L from residuals")
        }
        Model::Lad => {
            let x = data.covariates();
            let resid: Vec<f64> = (Vector::from_row_slice(data.continuous_response()?)
                - x * beta_hat)
                .iter()
                .copied()
                .collect();
            let (f, h) = kernel_density(&resid, 0.0)?;
            let gram = x.transpose() * x;
            let mut s = SandwichCovariance::new(
                &gram * (2.0 * f),
                gram,
                n,
                Variability::Robust,
                "kernel density of residuals at zero",
            );
            s.bandwidth = Some(h);
            s
        }
        Model::Logistic => {
            let x = data.covariates();
            let y = data.binary_response()?;
            let q: Vec<f64> = (x * beta_hat).iter().map(|e| logistic(*e)).collect();
            let j = weighted_gram(x, q.iter().map(|q| q * (1.0 - q)));
            let k = if robust {
                outer_sum(x, y.iter().zip(&q).map(|(y, q)| y - q))
            } else {
                j.clone()
            };
            SandwichCovariance::new(j, k, n, variability, "logistic information")
        }
        Model::Poisson => {
            let x = data.covariates();
            let y = data.count_response()?;
            let mu: Vec<f64> = (x * beta_hat).iter().map(|e| e.exp()).collect();
            let j = weighted_gram(x, mu.iter().copied());
            let k = if robust {
                outer_sum(x, y.iter().zip(&mu).map(|(y, m)| *y as f64 - m))
            } else {
                j.clone()
            };
            SandwichCovariance::new(j, k, n, variability, "Poisson information")
        }
        Model::Cox => {
            let obj = CoxObjective::new(data)?;
            let j = obj.derivatives(beta_hat, true).hessian;
            SandwichCovariance::new(
                j.clone(),
                j,
                n,
                Variability::Model,
                "observed partial-likelihood information",
            )
        }
        Model::ExpHazard { rate } => {
            let x = data.covariates();
            let obj = ExpHazardObjective::new(data, &Baseline::Constant(rate), None)?;
            let j = obj.information(beta_hat);
            let k = if robust {
                let events = data.survival_response()?;
                let eta = x * beta_hat;
                outer_sum(
                    x,
                    events
                        .iter()
                        .zip(eta.iter())
                        .zip(obj.exposure())
                        .map(|((r, e), a)| {
                            let d = if r.event { 1.0 } else { 0.0 };
                            d - e.exp() * a
                        }),
                )
            } else {
                j.clone()
            };
            SandwichCovariance::new(j, k, n, variability, "observed information")
        }
        Model::DoubleExponential => {
            let y = data.continuous_response()?;
            let (mu, tau) = (beta_hat[0], beta_hat[1]);
            let nf = n as f64;
            let resid: Vec<f64> = y.iter().map(|v| v - mu).collect();
            let (f, bandwidth) = if robust {
                let (f, h) = kernel_density(&resid, 0.0)?;
                (f, Some(h))
            } else {
                (0.5 / tau, None)
            };
            let j = Matrix::from_diagonal(&Vector::from_row_slice(&[2.0 * f * nf, nf]));
            let k = if robust {
                let mut k = Matrix::zeros(2, 2);
                for r in &resid {
                    let s = Vector::from_row_slice(&[sign(*r), r.abs() - tau]);
                    k.ger(1.0, &s, &s, 1.0);
                }
                k
            } else {
                Matrix::from_diagonal(&Vector::from_row_slice(&[nf, nf * tau * tau]))
            };
            let mut s = SandwichCovariance::new(
                j,
                k,
                n,
                variability,
                "median and mean-absolute-deviation estimating equations",
            );
            s.bandwidth = bandwidth;
            s
        }
        Model::MarkovPl => {
            let obj = MarkovPlObjective::new(data, Default::default())?;
            let j = scalar(obj.information(beta_hat[0]));
            match variability {
                Variability::Model => SandwichCovariance::new(
                    j.clone(),
                    j,
                    n,
                    variability,
                    "pseudo-likelihood information, K = J",
                ),
                Variability::Robust => SandwichCovariance::new(
                    j,
                    scalar(obj.score_variance(beta_hat[0])),
                    n,
                    variability,
                    "pseudo-likelihood information with lag-one score variance",
                ),
            }
        }
    };
    if out.j.iter().any(|v| !v.is_finite()) || !is_positive_definite(&out.j) {
        return Err(Error::SingularInformation);
    }
    out.j = symmetrize(&out.j);
    Ok(out)
}
