use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{require_full_rank, tolerance, Dataset, FitResult, Model};
use crate::convex::{solve_smooth, ConvexObjective, Smoothness};
use crate::error::Result;
use crate::linalg::{weighted_gram, Matrix, Vector};
use crate::special::{log1pexp, logistic};

/// Negative logistic log-likelihood `Σ [log(1 + e^{β'x_i}) − y_i β'x_i]`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    x: Matrix,
    y: Vec<f64>,
}

impl LogisticObjective {
    pub fn new(data: &Dataset) -> Result<Self> {
        Ok(LogisticObjective {
            x: data.covariates().clone(),
            y: data.binary_response()?.to_vec(),
        })
    }
}

impl ConvexObjective for LogisticObjective {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let eta = &self.x * beta;
        eta.iter()
            .zip(&self.y)
            .map(|(e, y)| log1pexp(*e) - y * e)
            .sum()
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        let eta = &self.x * beta;
        let resid = Vector::from_iterator(
            eta.len(),
            eta.iter().zip(&self.y).map(|(e, y)| logistic(*e) - y),
        );
        Some(self.x.transpose() * resid)
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        let eta = &self.x * beta;
        Some(weighted_gram(
            &self.x,
            eta.iter().map(|e| {
                let q = logistic(*e);
                q * (1.0 - q)
            }),
        ))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Negative Poisson log-likelihood `Σ [e^{β'z_i} − y_i β'z_i]` (without the
/// `log y_i!` constant).
#[derive(Debug, Clone)]
pub struct PoissonObjective {
    z: Matrix,
    y: Vec<f64>,
}

impl PoissonObjective {
    pub fn new(data: &Dataset) -> Result<Self> {
        let y = data.count_response()?.iter().map(|&c| c as f64).collect();
        Ok(PoissonObjective {
            z: data.covariates().clone(),
            y,
        })
    }
}

impl ConvexObjective for PoissonObjective {
    fn dim(&self) -> usize {
        self.z.ncols()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let eta = &self.z * beta;
        eta.iter().zip(&self.y).map(|(e, y)| e.exp() - y * e).sum()
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        let eta = &self.z * beta;
        let resid =
            Vector::from_iterator(eta.len(), eta.iter().zip(&self.y).map(|(e, y)| e.exp() - y));
        Some(self.z.transpose() * resid)
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        let eta = &self.z * beta;
        Some(weighted_gram(&self.z, eta.iter().map(|e| e.exp())))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Logistic regression by maximum likelihood. Complete or quasi-complete
/// separation surfaces as [`Error::MonotoneObjective`](crate::Error::MonotoneObjective).
pub fn fit_logistic(data: &Dataset) -> Result<FitResult> {
    require_full_rank(data.covariates())?;
    let obj = LogisticObjective::new(data)?;
    let solve = solve_smooth(&obj, &Vector::zeros(obj.dim()), tolerance(data.len()))?;
    Ok(FitResult::new(Model::Logistic, solve))
}

/// Poisson regression with log link.
pub fn fit_poisson(data: &Dataset) -> Result<FitResult> {
    require_full_rank(data.covariates())?;
    let obj = PoissonObjective::new(data)?;
    let solve = solve_smooth(&obj, &Vector::zeros(obj.dim()), tolerance(data.len()))?;
    Ok(FitResult::new(Model::Poisson, solve))
}
