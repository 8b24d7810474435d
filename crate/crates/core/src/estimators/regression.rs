use super::{require_full_rank, tolerance, Dataset, FitResult, Model};
use crate::convex::{solve_nonsmooth, solve_smooth, ConvexObjective, L1Objective, Smoothness};
use crate::error::Result;
use crate::linalg::{Matrix, Vector};

/// `½ Σ (y_i − β'x_i)²`.
#[derive(Debug, Clone)]
pub struct LeastSquaresObjective {
    x: Matrix,
    y: Vector,
    gram: Matrix,
}

impl LeastSquaresObjective {
    pub fn new(data: &Dataset) -> Result<Self> {
        let y = Vector::from_row_slice(data.continuous_response()?);
        let x = data.covariates().clone();
        let gram = x.transpose() * &x;
        Ok(LeastSquaresObjective { x, y, gram })
    }
}

impl ConvexObjective for LeastSquaresObjective {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn value(&self, beta: &Vector) -> f64 {
        0.5 * (&self.y - &self.x * beta).norm_squared()
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        Some(-(self.x.transpose() * (&self.y - &self.x * beta)))
    }

    fn hessian(&self, _beta: &Vector) -> Option<Matrix> {
        Some(self.gram.clone())
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Ordinary least squares.
pub fn fit_ols(data: &Dataset) -> Result<FitResult> {
    require_full_rank(data.covariates())?;
    let obj = LeastSquaresObjective::new(data)?;
    let scale = obj.y.amax().max(1.0) * obj.x.amax().max(1.0);
    let solve = solve_smooth(
        &obj,
        &Vector::zeros(obj.dim()),
        tolerance(data.len()) * scale,
    )?;
    Ok(FitResult::new(Model::Ols, solve))
}

/// Least absolute deviation regression.
pub fn fit_lad(data: &Dataset) -> Result<FitResult> {
    require_full_rank(data.covariates())?;
    let x = data.covariates().clone();
    let scale: f64 = x.row_iter().map(|r| r.norm()).sum::<f64>().max(1.0);
    let obj = L1Objective::least_absolute(x, Vector::from_row_slice(data.continuous_response()?))?;
    let solve = solve_nonsmooth(&obj, &Vector::zeros(obj.dim()), 1e-10 * scale)?;
    Ok(FitResult::new(Model::Lad, solve))
}
