use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{tolerance, Dataset, FitResult, Model, SurvivalRecord};
use crate::convex::{solve_smooth, ConvexObjective, Smoothness};
use crate::error::{Error, Result};
use crate::linalg::{self, weighted_gram, Matrix, Vector};
use crate::quadrature::adaptive_simpson;

/// Negative Cox log partial likelihood with Breslow handling of ties:
/// `Σ_events [log Σ_{j: T_j ≥ T_i} exp(β'z_j) − β'z_i]`.
///
/// Covariates are centred internally; the partial likelihood is invariant
/// under that shift.
#[derive(Debug, Clone)]
pub struct CoxObjective {
    z: Matrix,
    records: Vec<SurvivalRecord>,
    /// Subject indices grouped by distinct time, latest first.
    groups: Vec<Vec<usize>>,
}

/// Value, gradient and Hessian of the negative log partial likelihood.
pub(crate) struct CoxDerivatives {
    pub value: f64,
    pub gradient: Vector,
    pub hessian: Matrix,
}

impl CoxObjective {
    pub fn new(data: &Dataset) -> Result<Self> {
        let records = data.survival_response()?.to_vec();
        let raw = data.covariates();
        let n = raw.nrows();
        let mut z = raw.clone();
        for mut col in z.column_iter_mut() {
            let mean = col.sum() / n as f64;
            col.add_scalar_mut(-mean);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| records[b].time.total_cmp(&records[a].time));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in order {
            match groups.last_mut() {
                Some(g) if records[g[0]].time == records[i].time => g.push(i),
                _ => groups.push(alloc::vec![i]),
            }
        }
        Ok(CoxObjective { z, records, groups })
    }

    pub fn events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    pub(crate) fn derivatives(&self, beta: &Vector, want_hessian: bool) -> CoxDerivatives {
        let p = self.z.ncols();
        let eta = &self.z * beta;
        let mut shift = f64::NEG_INFINITY;
        let mut s0 = 0.0;
        let mut s1 = Vector::zeros(p);
        let mut s2 = Matrix::zeros(p, p);
        let mut value = 0.0;
        let mut gradient = Vector::zeros(p);
        let mut hessian = Matrix::zeros(p, p);
        for group in &self.groups {
            for &j in group {
                if eta[j] > shift {
                    let scale = (shift - eta[j]).exp();
                    s0 *= scale;
                    s1 *= scale;
                    if want_hessian {
                        s2 *= scale;
                    }
                    shift = eta[j];
                }
                let w = (eta[j] - shift).exp();
                let zj = self.z.row(j).transpose();
                s0 += w;
                s1.axpy(w, &zj, 1.0);
                if want_hessian {
                    s2.ger(w, &zj, &zj, 1.0);
                }
            }
            let events = group.iter().filter(|&&i| self.records[i].event).count();
            if events == 0 {
                continue;
            }
            let zbar = &s1 / s0;
            let log_risk = shift + s0.ln();
            for &i in group.iter().filter(|&&i| self.records[i].event) {
                value += log_risk - eta[i];
                gradient += &zbar - self.z.row(i).transpose();
            }
            if want_hessian {
                let v = &s2 / s0 - &zbar * zbar.transpose();
                hessian += v * events as f64;
            }
        }
        CoxDerivatives {
            value,
            gradient,
            hessian: linalg::symmetrize(&hessian),
        }
    }
}

impl ConvexObjective for CoxObjective {
    fn dim(&self) -> usize {
        self.z.ncols()
    }

    fn value(&self, beta: &Vector) -> f64 {
        self.derivatives(beta, false).value
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        Some(self.derivatives(beta, false).gradient)
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        Some(self.derivatives(beta, true).hessian)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Cox regression with time-fixed covariates.
///
/// A covariate that carries no information (the observed information at
/// `β = 0` is singular, e.g. all `z_i` equal) is reported as
/// [`Error::RankDeficient`].
pub fn fit_cox(data: &Dataset) -> Result<FitResult> {
    let obj = CoxObjective::new(data)?;
    if obj.events() == 0 {
        return Err(Error::NoEvents);
    }
    if obj.dim() == 0 {
        return Err(Error::RankDeficient);
    }
    let start = Vector::zeros(obj.dim());
    let info = obj.derivatives(&start, true).hessian;
    if !linalg::is_positive_definite(&info) {
        return Err(Error::RankDeficient);
    }
    let solve = solve_smooth(&obj, &start, tolerance(data.len()))?;
    Ok(FitResult::new(Model::Cox, solve))
}

/// Baseline hazard `λ₀` for the parametric proportional hazards model.
#[derive(Clone, Copy)]
pub enum Baseline<'a> {
    Constant(f64),
    /// Positive, continuous hazard on `[0, L]`; integrated numerically.
    Function(&'a dyn Fn(f64) -> f64),
}

impl core::fmt::Debug for Baseline<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Baseline::Constant(r) => f.debug_tuple("Constant").field(r).finish(),
            Baseline::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Baseline<'_> {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Baseline::Constant(r) => *r,
            Baseline::Function(f) => f(t),
        }
    }

    /// `Λ₀(t) = ∫₀ᵗ λ₀(s) ds`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        match self {
            Baseline::Constant(r) => {
                if !(*r > 0.0) || !r.is_finite() {
                    return Err(Error::invalid("baseline hazard must be positive"));
                }
                Ok(r * t)
            }
            Baseline::Function(f) => {
                for s in [0.0, 0.5 * t, t] {
                    let v = f(s);
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::invalid(
                            "baseline hazard must be positive and finite",
                        ));
                    }
                }
                adaptive_simpson(f, 0.0, t, 1e-12 * (1.0 + t))
            }
        }
    }
}

/// Negative log-likelihood of the parametric model
/// `Σ [exp(β'z_i) Λ₀(min(T_i, L)) − δ_i β'z_i]`, events after `L` censored.
#[derive(Debug, Clone)]
pub struct ExpHazardObjective {
    z: Matrix,
    exposure: Vec<f64>,
    events: Vec<f64>,
}

impl ExpHazardObjective {
    pub fn new(data: &Dataset, baseline: &Baseline<'_>, horizon: Option<f64>) -> Result<Self> {
        let records = data.survival_response()?;
        let horizon = horizon.unwrap_or_else(|| records.iter().map(|r| r.time).fold(0.0, f64::max));
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        let mut exposure = Vec::with_capacity(records.len());
        let mut events = Vec::with_capacity(records.len());
        for r in records {
            exposure.push(baseline.cumulative(r.time.min(horizon))?);
            events.push(if r.event && r.time <= horizon {
                1.0
            } else {
                0.0
            });
        }
        Ok(ExpHazardObjective {
            z: data.covariates().clone(),
            exposure,
            events,
        })
    }

    pub fn exposure(&self) -> &[f64] {
        &self.exposure
    }

    pub fn information(&self, beta: &Vector) -> Matrix {
        let eta = &self.z * beta;
        weighted_gram(
            &self.z,
            eta.iter().zip(&self.exposure).map(|(e, a)| e.exp() * a),
        )
    }
}

impl ConvexObjective for ExpHazardObjective {
    fn dim(&self) -> usize {
        self.z.ncols()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let eta = &self.z * beta;
        eta.iter()
            .zip(&self.exposure)
            .zip(&self.events)
            .map(|((e, a), d)| e.exp() * a - d * e)
            .sum()
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        let eta = &self.z * beta;
        let r = Vector::from_iterator(
            eta.len(),
            eta.iter()
                .zip(&self.exposure)
                .zip(&self.events)
                .map(|((e, a), d)| e.exp() * a - d),
        );
        Some(self.z.transpose() * r)
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        Some(self.information(beta))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Maximum likelihood for `λ_i(s) = λ₀(s) exp(β'z_i)` with known `λ₀`.
/// `horizon` defaults to the largest observed time.
pub fn fit_exp_hazard(
    data: &Dataset,
    baseline: &Baseline<'_>,
    horizon: Option<f64>,
) -> Result<FitResult> {
    super::require_full_rank(data.covariates())?;
    let obj = ExpHazardObjective::new(data, baseline, horizon)?;
    let solve = solve_smooth(&obj, &Vector::zeros(obj.dim()), tolerance(data.len()))?;
    let rate = match baseline {
        Baseline::Constant(r) => *r,
        Baseline::Function(f) => f(0.0),
    };
    Ok(FitResult::new(Model::ExpHazard { rate }, solve))
}
