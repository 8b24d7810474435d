use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::config::{Link, MeanFunction, ScenarioConfig};
use super::generate::{population, Population};
use crate::convex::{solve_smooth, ConvexObjective, Smoothness};
use crate::distributions::ErrorLaw;
use crate::error::{Error, Result};
use crate::estimators::Model;
use crate::linalg::{inverse_spd, is_positive_definite, symmetrize, weighted_gram, Matrix, Vector};
use crate::special::{log1pexp, logistic, normal_cdf};

/// Which statistic the replications report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    /// `√n (θ̂ − θ₀)`, compared with a closed-form covariance.
    Scaled,
    /// `J_n(β₀)^{1/2} (β̂ − β₀)`, compared with the identity.
    Standardized,
    /// `√n (β̂ − β₀)`, compared with the inverse of the replication-average
    /// of `J_n(β̂)/n`.
    AverageInformation,
}

impl StatisticKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::Scaled => "scaled",
            StatisticKind::Standardized => "standardized",
            StatisticKind::AverageInformation => "average_information",
        }
    }
}

/// Target parameter and limit law of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub theta0: Vector,
    pub kind: StatisticKind,
    /// Limit covariance; `None` when it is assembled from the replications.
    pub covariance: Option<Matrix>,
    pub provenance: &'static str,
}

/// Per-observation population matrices of a regression-type working model.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSandwich {
    pub theta0: Vector,
    pub j: Matrix,
    pub k_plus_l: Matrix,
    pub exact: bool,
}

impl PopulationSandwich {
    /// `J⁻¹ (K + L) J⁻¹`.
    pub fn covariance(&self) -> Result<Matrix> {
        let ji = inverse_spd(&self.j)?;
        Ok(symmetrize(&(&ji * &self.k_plus_l * &ji)))
    }
}

fn row_vec(pop: &Population, i: usize) -> Vec<f64> {
    pop.rows.row(i).iter().copied().collect()
}

fn constant_sigma(s: &ScenarioConfig) -> Result<f64> {
    if !s.scale.is_constant() {
        return Err(Error::invalid("location scenarios need a constant scale"));
    }
    s.scale.eval(&[])
}

/// `p(1−p) / f(μ_p)²` for the unit law, times `σ²`.
pub fn quantile_variance(law: &ErrorLaw, sigma: f64, p: f64) -> f64 {
    let f = law.pdf(law.quantile(p));
    sigma * sigma * p * (1.0 - p) / (f * f)
}

/// Limit covariance of `√n (Q_{n,p} − μ_p)` over a grid of levels:
/// `p_i (1 − p_j) / (f(μ_{p_i}) f(μ_{p_j}))` for `p_i ≤ p_j`.
pub fn quantile_process_covariance(law: &ErrorLaw, sigma: f64, levels: &[f64]) -> Matrix {
    let dens: Vec<f64> = levels
        .iter()
        .map(|&p| law.pdf(law.quantile(p)) / sigma)
        .collect();
    Matrix::from_fn(levels.len(), levels.len(), |i, j| {
        let (a, b) = if levels[i] <= levels[j] {
            (levels[i], levels[j])
        } else {
            (levels[j], levels[i])
        };
        a * (1.0 - b) / (dens[i] * dens[j])
    })
}

/// Limit variance of `√n (M_{n,α} − θ₀)` for symmetric errors:
/// `σ² E|ε|^{2α−2} / ((α−1)² (E|ε|^{α−2})²)`.
pub fn l_alpha_variance(law: &ErrorLaw, sigma: f64, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(quantile_variance(law, sigma, 0.5));
    }
    if !(alpha > 1.0) {
        return Err(Error::invalid("alpha must be at least one"));
    }
    let num = law.abs_moment(2.0 * alpha - 2.0)?;
    let den = law.abs_moment(alpha - 2.0)?;
    Ok(sigma * sigma * num / ((alpha - 1.0) * (alpha - 1.0) * den * den))
}

/// Weighted least squares over the population: `β₀ = (E xx')⁻¹ E x m(x)`.
fn ols_population(s: &ScenarioConfig, pop: &Population) -> Result<PopulationSandwich> {
    let j = weighted_gram(&pop.rows, pop.weights.iter().copied());
    let mut xm = Vector::zeros(pop.rows.ncols());
    let means: Vec<f64> = (0..pop.rows.nrows())
        .map(|i| s.mean.eval(&row_vec(pop, i), &s.theta0))
        .collect();
    for (i, m) in means.iter().enumerate() {
        xm.axpy(pop.weights[i] * m, &pop.rows.row(i).transpose(), 1.0);
    }
    if !is_positive_definite(&j) {
        return Err(Error::NonUniqueMinimizer);
    }
    let theta0 = inverse_spd(&j)? * xm;
    let fitted = &pop.rows * &theta0;
    let mut kl = Vec::with_capacity(means.len());
    for (i, m) in means.iter().enumerate() {
        let sigma = s.scale.eval(&row_vec(pop, i))?;
        let bias = m - fitted[i];
        kl.push(pop.weights[i] * (sigma * sigma + bias * bias));
    }
    Ok(PopulationSandwich {
        theta0,
        j,
        k_plus_l: weighted_gram(&pop.rows, kl.into_iter()),
        exact: pop.exact,
    })
}

/// `Σ_h w_h σ_h E|(m_h − b'x_h)/σ_h + ε|`.
struct PopulationLad<'a> {
    pop: &'a Population,
    means: Vec<f64>,
    sigmas: Vec<f64>,
    law: ErrorLaw,
}

impl PopulationLad<'_> {
    fn standardized(&self, b: &Vector) -> Vec<f64> {
        let fitted = &self.pop.rows * b;
        (0..self.means.len())
            .map(|i| (self.means[i] - fitted[i]) / self.sigmas[i])
            .collect()
    }
}

impl ConvexObjective for PopulationLad<'_> {
    fn dim(&self) -> usize {
        self.pop.rows.ncols()
    }

    fn value(&self, b: &Vector) -> f64 {
        self.standardized(b)
            .iter()
            .enumerate()
            .map(|(i, u)| self.pop.weights[i] * self.sigmas[i] * self.law.expected_abs_shift(*u))
            .sum()
    }

    fn gradient(&self, b: &Vector) -> Option<Vector> {
        let u = self.standardized(b);
        let mut g = Vector::zeros(self.dim());
        for (i, u) in u.iter().enumerate() {
            g.axpy(
                -self.pop.weights[i] * (2.0 * self.law.cdf(*u) - 1.0),
                &self.pop.rows.row(i).transpose(),
                1.0,
            );
        }
        Some(g)
    }

    fn hessian(&self, b: &Vector) -> Option<Matrix> {
        let u = self.standardized(b);
        Some(weighted_gram(
            &self.pop.rows,
            u.iter()
                .enumerate()
                .map(|(i, u)| self.pop.weights[i] * 2.0 * self.law.pdf(*u) / self.sigmas[i]),
        ))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

fn lad_population(s: &ScenarioConfig, pop: &Population) -> Result<PopulationSandwich> {
    let m = pop.rows.nrows();
    let means: Vec<f64> = (0..m)
        .map(|i| s.mean.eval(&row_vec(pop, i), &s.theta0))
        .collect();
    let sigmas = (0..m)
        .map(|i| s.scale.eval(&row_vec(pop, i)))
        .collect::<Result<Vec<f64>>>()?;
    if sigmas.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid("population LAD needs a positive scale"));
    }
    let obj = PopulationLad {
        pop,
        means,
        sigmas,
        law: s.error,
    };
    let theta0 = if matches!(s.mean, MeanFunction::Linear) {
        // Symmetric errors: the conditional median is the linear predictor.
        Vector::from_row_slice(&s.theta0)
    } else {
        let start = ols_population(s, pop)?.theta0;
        solve_smooth(&obj, &start, 1e-12)?.argmin
    };
    let j = obj.hessian(&theta0).expect("analytic Hessian");
    if !is_positive_definite(&j) {
        return Err(Error::NonUniqueMinimizer);
    }
    let k = weighted_gram(&pop.rows, pop.weights.iter().copied());
    Ok(PopulationSandwich {
        theta0,
        j: symmetrize(&j),
        k_plus_l: k,
        exact: pop.exact,
    })
}

fn true_probability(s: &ScenarioConfig, pop: &Population, i: usize) -> f64 {
    let eta = || -> f64 {
        pop.rows
            .row(i)
            .iter()
            .zip(&s.theta0)
            .map(|(a, b)| a * b)
            .sum()
    };
    match &s.link {
        Link::Logistic => logistic(eta()),
        Link::Probit => normal_cdf(eta()),
        Link::Cloglog => -(-eta().exp()).exp_m1(),
        Link::Table { values } => values[pop.support_index[i]],
    }
}

/// Weighted Kullback–Leibler criterion `Σ_h w_h [log(1 + e^{b'x_h}) − q_h b'x_h]`.
struct PopulationLogistic<'a> {
    pop: &'a Population,
    q: Vec<f64>,
}

impl ConvexObjective for PopulationLogistic<'_> {
    fn dim(&self) -> usize {
        self.pop.rows.ncols()
    }

    fn value(&self, b: &Vector) -> f64 {
        let eta = &self.pop.rows * b;
        eta.iter()
            .enumerate()
            .map(|(i, e)| self.pop.weights[i] * (log1pexp(*e) - self.q[i] * e))
            .sum()
    }

    fn gradient(&self, b: &Vector) -> Option<Vector> {
        let eta = &self.pop.rows * b;
        let r = Vector::from_iterator(
            eta.len(),
            eta.iter()
                .enumerate()
                .map(|(i, e)| self.pop.weights[i] * (logistic(*e) - self.q[i])),
        );
        Some(self.pop.rows.transpose() * r)
    }

    fn hessian(&self, b: &Vector) -> Option<Matrix> {
        let eta = &self.pop.rows * b;
        Some(weighted_gram(
            &self.pop.rows,
            eta.iter()
                .enumerate()
                .map(|(i, e)| self.pop.weights[i] * logistic(*e) * logistic(-e)),
        ))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

fn logistic_population(s: &ScenarioConfig, pop: &Population) -> Result<PopulationSandwich> {
    let q: Vec<f64> = (0..pop.rows.nrows())
        .map(|i| true_probability(s, pop, i))
        .collect();
    let obj = PopulationLogistic { pop, q };
    if !is_positive_definite(&weighted_gram(&pop.rows, pop.weights.iter().copied())) {
        return Err(Error::NonUniqueMinimizer);
    }
    let theta0 = solve_smooth(&obj, &Vector::zeros(obj.dim()), 1e-13)?.argmin;
    let j = obj.hessian(&theta0).expect("analytic Hessian");
    if !is_positive_definite(&j) {
        return Err(Error::NonUniqueMinimizer);
    }
    let eta = &pop.rows * &theta0;
    let k = weighted_gram(
        &pop.rows,
        eta.iter().enumerate().map(|(i, e)| {
            let (qt, qm) = (obj.q[i], logistic(*e));
            pop.weights[i] * (qt * (1.0 - qt) + (qt - qm) * (qt - qm))
        }),
    );
    Ok(PopulationSandwich {
        theta0,
        j: symmetrize(&j),
        k_plus_l: k,
        exact: pop.exact,
    })
}

/// Population `J`, `K + L` and the pseudo-true parameter for OLS, LAD and
/// logistic scenarios.
pub fn population_sandwich(scenario: &ScenarioConfig) -> Result<PopulationSandwich> {
    let pop = population(scenario);
    match scenario.model {
        Model::Ols => ols_population(scenario, &pop),
        Model::Lad => lad_population(scenario, &pop),
        Model::Logistic => logistic_population(scenario, &pop),
        _ => Err(Error::invalid(
            "population sandwich covers OLS, LAD and logistic scenarios",
        )),
    }
}

/// Pseudo-true parameter: the population minimiser of the working
/// criterion, or `θ₀` itself when the working model holds.
pub fn population_projection(scenario: &ScenarioConfig) -> Result<Vector> {
    scenario.validate()?;
    match scenario.model {
        Model::Ols | Model::Lad | Model::Logistic => Ok(population_sandwich(scenario)?.theta0),
        _ => Ok(theory(scenario)?.theta0),
    }
}

/// Target and limit law of `scenario`.
pub fn theory(scenario: &ScenarioConfig) -> Result<Theory> {
    let s = scenario;
    let scaled = |theta0: Vector, cov: Matrix, provenance| Theory {
        theta0,
        kind: StatisticKind::Scaled,
        covariance: Some(symmetrize(&cov)),
        provenance,
    };
    Ok(match s.model {
        Model::Quantile { p } => {
            let sigma = constant_sigma(s)?;
            let theta = s.theta0[0] + sigma * s.error.quantile(p);
            scaled(
                Vector::from_element(1, theta),
                Matrix::from_element(1, 1, quantile_variance(&s.error, sigma, p)),
                "p(1-p)/f(q_p)^2",
            )
        }
        Model::LAlpha { alpha } => {
            let sigma = constant_sigma(s)?;
            scaled(
                Vector::from_element(1, s.theta0[0]),
                Matrix::from_element(1, 1, l_alpha_variance(&s.error, sigma, alpha)?),
                "E|e|^(2a-2) / ((a-1) E|e|^(a-2))^2",
            )
        }
        Model::DoubleExponential => {
            let sigma = constant_sigma(s)?;
            let mean_abs = s.error.abs_moment(1.0)?;
            let f0 = s.error.pdf(0.0);
            let cov = Matrix::from_diagonal(&Vector::from_row_slice(&[
                sigma * sigma / (4.0 * f0 * f0),
                sigma * sigma * (1.0 - mean_abs * mean_abs),
            ]));
            scaled(
                Vector::from_row_slice(&[s.theta0[0], sigma * mean_abs]),
                cov,
                "median and mean-absolute-deviation sandwich",
            )
        }
        Model::Ols => {
            let ps = population_sandwich(s)?;
            let cov = ps.covariance()?;
            scaled(ps.theta0, cov, "least-squares sandwich J^-1 (K+L) J^-1")
        }
        Model::Lad => {
            let ps = population_sandwich(s)?;
            let cov = ps.covariance()?;
            scaled(
                ps.theta0,
                cov,
                "LAD sandwich (2 f E xx')^-1 E xx' (2 f E xx')^-1",
            )
        }
        Model::Logistic if s.is_misspecified() => {
            let ps = population_sandwich(s)?;
            let cov = ps.covariance()?;
            scaled(
                ps.theta0,
                cov,
                "Kullback-Leibler projection sandwich J^-1 K J^-1",
            )
        }
        Model::Logistic | Model::Poisson | Model::ExpHazard { .. } => Theory {
            theta0: Vector::from_row_slice(&s.theta0),
            kind: StatisticKind::Standardized,
            covariance: Some(Matrix::identity(s.parameter_dim(), s.parameter_dim())),
            provenance: "identity after J_n(beta0)^(1/2) standardisation",
        },
        Model::Cox => Theory {
            theta0: Vector::from_row_slice(&s.theta0),
            kind: StatisticKind::AverageInformation,
            covariance: None,
            provenance: "inverse of the average observed partial-likelihood information J_n/n",
        },
        Model::MarkovPl => Theory {
            theta0: Vector::from_row_slice(&s.theta0),
            kind: StatisticKind::AverageInformation,
            covariance: None,
            provenance:
                "pseudo-likelihood sandwich from averaged J_n/n and lag-one score variance K_n/n",
        },
    })
}
