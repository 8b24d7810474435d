//! Model fits. Each returns the estimate with the solver report that
//! produced it; covariance ingredients come from
//! [`asymptotics::sandwich_for`](crate::asymptotics::sandwich_for).
//!
//! All solvers start from the zero vector.

mod data;
mod glm;
mod location;
mod markov;
mod posterior;
mod regression;
mod survival;

pub use data::{Dataset, Response, SurvivalRecord};
pub use glm::{fit_logistic, fit_poisson, LogisticObjective, PoissonObjective};
pub use location::{
    fit_double_exponential, fit_l_alpha, fit_quantile, quantile_check_loss, DoubleExponentialFit,
    LAlphaObjective,
};
pub use markov::{agreement_features, fit_markov_pl, CouplingModel, MarkovPlObjective};
pub use posterior::{posterior_mean_1d, PosteriorSummary, Prior};
pub use regression::{fit_lad, fit_ols, LeastSquaresObjective};
pub use survival::{fit_cox, fit_exp_hazard, Baseline, CoxObjective, ExpHazardObjective};

use alloc::boxed::Box;

use serde::{Deserialize, Serialize};

use crate::convex::{ConvexObjective, L1Objective, SolveReport};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Gradient (or subgradient certificate) tolerance per observation.
pub const TOL_PER_OBSERVATION: f64 = 1e-9;

pub(crate) fn tolerance(n: usize) -> f64 {
    TOL_PER_OBSERVATION * (n.max(1) as f64)
}

/// Model menu shared by fits, sandwich assembly and the simulation engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Quantile {
        p: f64,
    },
    LAlpha {
        alpha: f64,
    },
    Ols,
    Lad,
    Logistic,
    Poisson,
    Cox,
    /// Parametric proportional hazards with a constant baseline rate.
    ExpHazard {
        #[serde(default = "unit_rate")]
        rate: f64,
    },
    DoubleExponential,
    MarkovPl,
}

fn unit_rate() -> f64 {
    1.0
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Quantile { .. } => "quantile",
            Model::LAlpha { .. } => "l_alpha",
            Model::Ols => "ols",
            Model::Lad => "lad",
            Model::Logistic => "logistic",
            Model::Poisson => "poisson",
            Model::Cox => "cox",
            Model::ExpHazard { .. } => "exp_hazard",
            Model::DoubleExponential => "double_exponential",
            Model::MarkovPl => "markov_pl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta_hat: Vector,
    pub solve: SolveReport,
    pub model: Model,
}

impl FitResult {
    pub(crate) fn new(model: Model, solve: SolveReport) -> Self {
        FitResult {
            beta_hat: solve.argmin.clone(),
            solve,
            model,
        }
    }
}

/// Dispatches to the fit matching `model`.
pub fn fit(model: &Model, data: &Dataset) -> Result<FitResult> {
    match *model {
        Model::Quantile { p } => fit_quantile(data, p),
        Model::LAlpha { alpha } => fit_l_alpha(data, alpha),
        Model::Ols => fit_ols(data),
        Model::Lad => fit_lad(data),
        Model::Logistic => fit_logistic(data),
        Model::Poisson => fit_poisson(data),
        Model::Cox => fit_cox(data),
        Model::ExpHazard { rate } => fit_exp_hazard(data, &Baseline::Constant(rate), None),
        Model::DoubleExponential => fit_double_exponential(data).map(|f| f.into_fit_result()),
        Model::MarkovPl => fit_markov_pl(data, CouplingModel::Agreement),
    }
}

/// The convex criterion minimised by the fit for `model`.
///
/// The double-exponential model has no single convex criterion in its
/// natural parameters and is rejected.
pub fn objective<'a>(model: &Model, data: &'a Dataset) -> Result<Box<dyn ConvexObjective + 'a>> {
    Ok(match *model {
        Model::Quantile { p } => {
            let y = data.continuous_response()?;
            let n = y.len();
            Box::new(L1Objective::new(
                Matrix::from_element(n, 1, 1.0),
                Vector::from_row_slice(y),
                Vector::from_element(n, 0.5),
                Vector::from_element(1, -(p - 0.5) * n as f64),
            )?)
        }
        Model::LAlpha { alpha } => {
            Box::new(LAlphaObjective::new(data.continuous_response()?, alpha)?)
        }
        Model::Ols => Box::new(LeastSquaresObjective::new(data)?),
        Model::Lad => Box::new(L1Objective::least_absolute(
            data.covariates().clone(),
            Vector::from_row_slice(data.continuous_response()?),
        )?),
        Model::Logistic => Box::new(LogisticObjective::new(data)?),
        Model::Poisson => Box::new(PoissonObjective::new(data)?),
        Model::Cox => Box::new(CoxObjective::new(data)?),
        Model::ExpHazard { rate } => Box::new(ExpHazardObjective::new(
            data,
            &Baseline::Constant(rate),
            None,
        )?),
        Model::MarkovPl => Box::new(MarkovPlObjective::new(data, CouplingModel::Agreement)?),
        Model::DoubleExponential => {
            return Err(Error::invalid(
                "double-exponential fit has no single convex criterion",
            ))
        }
    })
}

pub(crate) fn require_full_rank(x: &Matrix) -> Result<()> {
    if x.ncols() == 0 || !crate::linalg::has_full_column_rank(x) {
        return Err(Error::RankDeficient);
    }
    Ok(())
}
