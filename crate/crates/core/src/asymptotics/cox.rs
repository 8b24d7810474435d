use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::estimators::Dataset;
use crate::linalg::{Matrix, Vector};

/// `J_n(s)` and `μ_n(s)` along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxConditions {
    pub s_grid: Vec<f64>,
    /// `n⁻¹ Σ Y_i(s) exp(β₀'z_i) (z_i − z̄(s))(z_i − z̄(s))'`.
    pub j: Vec<Matrix>,
    /// `n^{-1/2} max |z_i − z̄(s)|` over subjects at risk.
    pub mu: Vec<f64>,
    pub max_mu: f64,
}

/// Evaluates the relative-risk variance and the covariate spread at each
/// grid time. A grid time past the last exit leaves an empty risk set.
pub fn cox_conditions(data: &Dataset, beta0: &Vector, s_grid: &[f64]) -> Result<CoxConditions> {
    let records = data.survival_response()?;
    let z = data.covariates();
    if z.ncols() != beta0.len() {
        return Err(Error::invalid(
            "covariate and parameter dimensions disagree",
        ));
    }
    let n = records.len() as f64;
    let eta = z * beta0;
    let top = eta.iter().fold(f64::NEG_INFINITY, |a, &e| a.max(e));
    let risk: Vec<f64> = eta.iter().map(|e| (e - top).exp()).collect();
    let scale = top.exp();
    let p = z.ncols();
    let mut j = Vec::with_capacity(s_grid.len());
    let mut mu = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::invalid("grid times must be finite and nonnegative"));
        }
        let at_risk: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].time >= s)
            .collect();
        if at_risk.is_empty() {
            return Err(Error::EmptyRiskSet(s));
        }
        let total: f64 = at_risk.iter().map(|&i| risk[i]).sum();
        let mut zbar = Vector::zeros(p);
        for &i in &at_risk {
            zbar.axpy(risk[i] / total, &z.row(i).transpose(), 1.0);
        }
        let mut m = Matrix::zeros(p, p);
        let mut spread: f64 = 0.0;
        for &i in &at_risk {
            let d = z.row(i).transpose() - &zbar;
            spread = spread.max(d.norm());
            m.ger(risk[i] * scale / n, &d, &d, 1.0);
        }
        j.push(m);
        mu.push(spread / n.sqrt());
    }
    let max_mu = mu.iter().fold(0.0, |a: f64, &b| a.max(b));
    Ok(CoxConditions {
        s_grid: s_grid.to_vec(),
        j,
        mu,
        max_mu,
    })
}
