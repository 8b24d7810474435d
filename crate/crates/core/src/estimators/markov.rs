use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{tolerance, Dataset, FitResult, Model};
use crate::convex::{solve_smooth, ConvexObjective, Smoothness};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Interaction statistic `H_i(j, x_∂i)` of the conditional model
/// `f_β(j | x_∂i) ∝ exp(β'H_i(j, x_∂i))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingModel {
    /// Scalar β; `H_i(j) = I{j = x_{i−1}} + I{j = x_{i+1}}`. End points use
    /// their single neighbour.
    #[default]
    Agreement,
}

/// `H_i(j)` for every position `i` of the (1-based) path and every state
/// `j ∈ 1..=k`, stored as `features[i][j − 1]`.
pub fn agreement_features(path: &[usize], k: usize) -> Vec<Vec<f64>> {
    let m = path.len();
    (0..m)
        .map(|i| {
            let mut h = alloc::vec![0.0; k];
            if i > 0 {
                h[path[i - 1] - 1] += 1.0;
            }
            if i + 1 < m {
                h[path[i + 1] - 1] += 1.0;
            }
            h
        })
        .collect()
}

/// Negative log pseudo-likelihood `Σ_i [log Σ_j exp(βH_i(j)) − βH_i(x_i)]`.
#[derive(Debug, Clone)]
pub struct MarkovPlObjective {
    features: Vec<Vec<f64>>,
    observed: Vec<f64>,
}

impl MarkovPlObjective {
    pub fn new(data: &Dataset, model: CouplingModel) -> Result<Self> {
        let (path, k) = data.markov_response()?;
        if path.len() < 3 {
            return Err(Error::PathTooShort);
        }
        let CouplingModel::Agreement = model;
        let features = agreement_features(path, k);
        let observed = path.iter().zip(&features).map(|(&x, h)| h[x - 1]).collect();
        Ok(MarkovPlObjective { features, observed })
    }

    /// Conditional mean and variance of `H_i(X_i)` at each position.
    pub fn conditional_moments(&self, beta: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.features.iter().map(move |h| {
            let top = h.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(beta * v));
            let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for &v in h {
                let w = (beta * v - top).exp();
                s0 += w;
                s1 += w * v;
                s2 += w * v * v;
            }
            let mean = s1 / s0;
            (mean, (s2 / s0 - mean * mean).max(0.0))
        })
    }

    /// `J_n(β) = Σ_i VAR{H_i(X_i) | x_∂i}`.
    pub fn information(&self, beta: f64) -> f64 {
        self.conditional_moments(beta).map(|(_, v)| v).sum()
    }

    /// Centred scores `H_i(x_i) − h_i(x_∂i)` at `β`.
    pub fn scores(&self, beta: f64) -> Vec<f64> {
        self.conditional_moments(beta)
            .zip(&self.observed)
            .map(|((m, _), o)| o - m)
            .collect()
    }

    /// `K_n(β) = Σ ψ_i² + 2 Σ ψ_i ψ_{i+1}`, the variance of the summed
    /// pseudo-score. Each `ψ_i` has mean zero given every other site, so
    /// scores two or more positions apart are uncorrelated, but neighbours
    /// share sites and are not.
    pub fn score_variance(&self, beta: f64) -> f64 {
        let psi = self.scores(beta);
        let lag0: f64 = psi.iter().map(|v| v * v).sum();
        let lag1: f64 = psi.windows(2).map(|w| w[0] * w[1]).sum();
        lag0 + 2.0 * lag1
    }
}

impl ConvexObjective for MarkovPlObjective {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, beta: &Vector) -> f64 {
        let b = beta[0];
        self.features
            .iter()
            .zip(&self.observed)
            .map(|(h, o)| {
                let top = h.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(b * v));
                top + h.iter().map(|&v| (b * v - top).exp()).sum::<f64>().ln() - b * o
            })
            .sum()
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        let g: f64 = self.scores(beta[0]).iter().map(|s| -s).sum();
        Some(Vector::from_element(1, g))
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        Some(Matrix::from_element(1, 1, self.information(beta[0])))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Maximum pseudo-likelihood for a first-order chain with `α_i ≡ 0`.
pub fn fit_markov_pl(data: &Dataset, model: CouplingModel) -> Result<FitResult> {
    let obj = MarkovPlObjective::new(data, model)?;
    let solve = solve_smooth(&obj, &Vector::zeros(1), tolerance(data.len()))?;
    Ok(FitResult::new(Model::MarkovPl, solve))
}
