use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Baseline, Dataset, ExpHazardObjective};
use crate::linalg::{inv_sqrt_spd, weighted_gram, Matrix, Vector};
use crate::special::logistic;

pub const DEFAULT_DELTA_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];

/// Which δ decides the pass flag and the threshold `N_n(δ)` must beat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LindebergOptions {
    pub delta_grid: Vec<f64>,
    pub delta: f64,
    pub threshold: f64,
}

impl Default for LindebergOptions {
    fn default() -> Self {
        LindebergOptions {
            delta_grid: DEFAULT_DELTA_GRID.to_vec(),
            delta: 0.2,
            threshold: 0.05,
        }
    }
}

impl LindebergOptions {
    fn validate(&self) -> Result<()> {
        if self
            .delta_grid
            .iter()
            .chain([&self.delta])
            .any(|d| !(*d > 0.0) || !d.is_finite())
        {
            return Err(Error::invalid("δ values must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindebergReport {
    pub delta_grid: Vec<f64>,
    /// `N_n(δ)` on the grid.
    pub n_values: Vec<f64>,
    /// Bernoulli case only: the Lindeberg sum `L_n(δ)` and `N_n(2δ)`.
    pub lindeberg_values: Option<Vec<f64>>,
    pub n_double_delta: Option<Vec<f64>>,
    /// `max_i |J_n^{-1/2} x_i|`, or `max |z_i|` after standardisation.
    pub lambda: f64,
    pub p: usize,
    /// `max_i |x_i| / √n` (logistic).
    pub mu: Option<f64>,
    /// Normalising constant `(Σ z_i² q_i(1−q_i))^{1/2}` (Bernoulli).
    pub scale: Option<f64>,
    /// Poisson: `Σ μ_i ρ(|J_n^{-1/2} z_i|)` with `exp(u) = 1 + u + u²/2 + ρ(u)/6`.
    pub rho_sum: Option<f64>,
    pub delta: f64,
    pub n_at_delta: f64,
    pub threshold: f64,
    pub passes: bool,
}

impl LindebergReport {
    /// `N_n` non-increasing along the (sorted) grid and `N_n(δ) ≤ p λ / δ`.
    pub fn invariants_hold(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self
            .delta_grid
            .iter()
            .copied()
            .zip(self.n_values.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = pairs.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
        let bounded = pairs
            .iter()
            .all(|(d, n)| *n <= self.p as f64 * self.lambda / d + 1e-12);
        monotone && bounded
    }

    /// `½ N_n(2δ) ≤ L_n(δ) ≤ N_n(δ)` on the grid (Bernoulli only).
    pub fn sandwich_holds(&self) -> Option<bool> {
        let l = self.lindeberg_values.as_ref()?;
        let n2 = self.n_double_delta.as_ref()?;
        Some(
            l.iter()
                .zip(&self.n_values)
                .zip(n2)
                .all(|((l, n), n2)| 0.5 * n2 <= l + 1e-12 && *l <= n + 1e-12),
        )
    }
}

/// Weighted norms `|u_i|` and weights `w_i |u_i|²` with `Σ w_i |u_i|² = p`.
struct Standardised {
    norms: Vec<f64>,
    mass: Vec<f64>,
    p: usize,
}

impl Standardised {
    fn from_design(x: &Matrix, weights: &[f64]) -> Result<Self> {
        let j = weighted_gram(x, weights.iter().copied());
        let root = inv_sqrt_spd(&j)?;
        let norms: Vec<f64> = x
            .row_iter()
            .map(|r| (&root * r.transpose()).norm())
            .collect();
        let mass = norms.iter().zip(weights).map(|(u, w)| w * u * u).collect();
        Ok(Standardised {
            norms,
            mass,
            p: x.ncols(),
        })
    }

    fn n_of(&self, delta: f64) -> f64 {
        self.norms
            .iter()
            .zip(&self.mass)
            .filter(|(u, _)| **u >= delta)
            .map(|(_, m)| m)
            .sum()
    }

    fn lambda(&self) -> f64 {
        self.norms.iter().fold(0.0, |a: f64, u| a.max(*u))
    }

    fn report(&self, opts: &LindebergOptions) -> LindebergReport {
        let n_at_delta = self.n_of(opts.delta);
        LindebergReport {
            delta_grid: opts.delta_grid.clone(),
            n_values: opts.delta_grid.iter().map(|&d| self.n_of(d)).collect(),
            lindeberg_values: None,
            n_double_delta: None,
            lambda: self.lambda(),
            p: self.p,
            mu: None,
            scale: None,
            rho_sum: None,
            delta: opts.delta,
            n_at_delta,
            threshold: opts.threshold,
            passes: n_at_delta < opts.threshold,
        }
    }
}

/// Scalar Bernoulli array: `N_n(δ)` and the Lindeberg sum `L_n(δ)` after
/// standardising `Σ z_i² q_i(1−q_i)` to one.
pub fn bernoulli_lindeberg(
    z: &[f64],
    q: &[f64],
    opts: &LindebergOptions,
) -> Result<LindebergReport> {
    opts.validate()?;
    if z.len() != q.len() || z.is_empty() {
        return Err(Error::invalid(
            "z and q must be non-empty and of equal length",
        ));
    }
    if z.iter().any(|v| !v.is_finite()) || q.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("z must be finite and q within [0, 1]"));
    }
    let var: f64 = z.iter().zip(q).map(|(z, q)| z * z * q * (1.0 - q)).sum();
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let scale = var.sqrt();
    let zs: Vec<f64> = z.iter().map(|v| v / scale).collect();
    let n_of = |delta: f64| -> f64 {
        zs.iter()
            .zip(q)
            .filter(|(z, _)| z.abs() >= delta)
            .map(|(z, q)| z * z * q * (1.0 - q))
            .sum()
    };
    let l_of = |delta: f64| -> f64 {
        zs.iter()
            .zip(q)
            .map(|(z, q)| {
                let hit = |c: f64| if (c * z).abs() >= delta { 1.0 } else { 0.0 };
                z * z * q * (1.0 - q) * (q * hit(*q) + (1.0 - q) * hit(1.0 - q))
            })
            .sum()
    };
    let n_at_delta = n_of(opts.delta);
    Ok(LindebergReport {
        delta_grid: opts.delta_grid.clone(),
        n_values: opts.delta_grid.iter().map(|&d| n_of(d)).collect(),
        lindeberg_values: Some(opts.delta_grid.iter().map(|&d| l_of(d)).collect()),
        n_double_delta: Some(opts.delta_grid.iter().map(|&d| n_of(2.0 * d)).collect()),
        lambda: zs.iter().fold(0.0, |a: f64, z| a.max(z.abs())),
        p: 1,
        mu: None,
        scale: Some(scale),
        rho_sum: None,
        delta: opts.delta,
        n_at_delta,
        threshold: opts.threshold,
        passes: n_at_delta < opts.threshold,
    })
}

fn check_dims(x: &Matrix, beta0: &Vector) -> Result<()> {
    if x.nrows() == 0 || x.ncols() != beta0.len() {
        return Err(Error::invalid("design and parameter dimensions disagree"));
    }
    Ok(())
}

/// Logistic design condition at `β₀` with `J_n = Σ q_i(1−q_i) x_i x_i'`.
pub fn logistic_condition(
    x: &Matrix,
    beta0: &Vector,
    opts: &LindebergOptions,
) -> Result<LindebergReport> {
    opts.validate()?;
    check_dims(x, beta0)?;
    let eta = x * beta0;
    let w: Vec<f64> = eta.iter().map(|&e| logistic(e) * logistic(-e)).collect();
    let mut report = Standardised::from_design(x, &w)?.report(opts);
    let max_row = x.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    report.mu = Some(max_row / (x.nrows() as f64).sqrt());
    Ok(report)
}

/// `ρ(u) = 6 (exp(u) − 1 − u − u²/2)`.
pub fn poisson_rho(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        u * u * u * (1.0 + u / 4.0 + u * u / 20.0)
    } else {
        6.0 * (u.exp_m1() - u - 0.5 * u * u)
    }
}

fn rate_condition(z: &Matrix, mu: &[f64], opts: &LindebergOptions) -> Result<LindebergReport> {
    let s = Standardised::from_design(z, mu)?;
    let mut report = s.report(opts);
    report.rho_sum = Some(
        mu.iter()
            .zip(&s.norms)
            .map(|(m, u)| m * poisson_rho(*u))
            .sum(),
    );
    Ok(report)
}

/// Poisson regression condition with `μ_i = exp(β₀'z_i)`.
pub fn poisson_condition(
    z: &Matrix,
    beta0: &Vector,
    opts: &LindebergOptions,
) -> Result<LindebergReport> {
    opts.validate()?;
    check_dims(z, beta0)?;
    let mu: Vec<f64> = (z * beta0).iter().map(|e| e.exp()).collect();
    rate_condition(z, &mu, opts)
}

/// Parametric hazard counterpart, time-fixed covariates: the integrated
/// intensities `exp(β₀'z_i) Λ₀(T_i ∧ L)` play the role of Poisson means.
pub fn exp_hazard_condition(
    data: &Dataset,
    baseline: &Baseline<'_>,
    horizon: Option<f64>,
    beta0: &Vector,
    opts: &LindebergOptions,
) -> Result<LindebergReport> {
    opts.validate()?;
    let z = data.covariates();
    check_dims(z, beta0)?;
    let obj = ExpHazardObjective::new(data, baseline, horizon)?;
    let mu: Vec<f64> = (z * beta0)
        .iter()
        .zip(obj.exposure())
        .map(|(e, a)| e.exp() * a)
        .collect();
    rate_condition(z, &mu, opts)
}

/// Helper for callers that want `N_n` for a single δ.
pub fn single_delta(delta: f64) -> LindebergOptions {
    LindebergOptions {
        delta_grid: vec![delta],
        delta,
        ..LindebergOptions::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_uniform_weights_vanish() {
        let n = 400;
        let z = vec![2.0 / (n as f64).sqrt(); n];
        let q = vec![0.5; n];
        let r = bernoulli_lindeberg(&z, &q, &LindebergOptions::default()).unwrap();
        // |z| after standardisation is 2/√n · 1/(2/√n · ½ √n) = 2/√n.
        assert!((r.lambda - 0.1).abs() < 1e-12);
        assert_eq!(r.n_values[3], 0.0);
        assert!(r.invariants_hold());
        assert_eq!(r.sandwich_holds(), Some(true));
    }

    #[test]
    fn single_summand_fails() {
        let r = bernoulli_lindeberg(&[2.0], &[0.5], &single_delta(1.0)).unwrap();
        assert!((r.n_values[0] - 1.0).abs() < 1e-15);
        assert!(!r.passes);
    }

    #[test]
    fn degenerate_variance() {
        assert!(matches!(
            bernoulli_lindeberg(&[1.0, 2.0], &[0.0, 1.0], &LindebergOptions::default()),
            Err(Error::DegenerateVariance)
        ));
    }

    #[test]
    fn dominant_row_fails_logistic() {
        let mut x = Matrix::from_element(50, 1, 0.01);
        x[(0, 0)] = 10.0;
        let r = logistic_condition(&x, &Vector::zeros(1), &LindebergOptions::default()).unwrap();
        assert!(!r.passes);
        assert!(r.invariants_hold());
    }

    #[test]
    fn intercept_poisson_scales_with_root_n() {
        let r100 = poisson_condition(
            &Matrix::from_element(100, 1, 1.0),
            &Vector::zeros(1),
            &LindebergOptions::default(),
        )
        .unwrap();
        let r400 = poisson_condition(
            &Matrix::from_element(400, 1, 1.0),
            &Vector::zeros(1),
            &LindebergOptions::default(),
        )
        .unwrap();
        assert!(r100.passes);
        assert!((r100.lambda / r400.lambda - 2.0).abs() < 1e-12);
        let ratio = r100.rho_sum.unwrap() / r400.rho_sum.unwrap();
        assert!((ratio - 2.0).abs() < 0.05);
    }

    #[test]
    fn rho_series_matches_direct() {
        for u in [-0.5, 1e-4, 0.2, 2.0] {
            let direct = 6.0 * (u.exp() - 1.0 - u - 0.5 * u * u);
            assert!((poisson_rho(u) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
            assert!(poisson_rho(u).abs() <= u.abs().powi(3) * u.abs().exp());
        }
    }
}
