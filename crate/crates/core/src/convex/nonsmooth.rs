use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{solve_smooth_with, ConvexObjective, SmoothOptions, Smoothness, SolveReport};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// `Σ w_i |y_i − x_i'β| + c'β` with non-negative weights.
///
/// Check-loss (quantile) criteria are the case `w_i = ½`,
/// `c = −(p − ½) Σ x_i`, up to an additive constant.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Objective {
    design: Matrix,
    targets: Vector,
    weights: Vector,
    linear: Vector,
}

impl L1Objective {
    pub fn new(design: Matrix, targets: Vector, weights: Vector, linear: Vector) -> Result<Self> {
        let (n, p) = design.shape();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        if targets.len() != n || weights.len() != n || linear.len() != p || p == 0 {
            return Err(Error::invalid("L1 objective dimensions disagree"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("L1 weights must be finite and non-negative"));
        }
        Ok(L1Objective {
            design,
            targets,
            weights,
            linear,
        })
    }

    /// Unit weights and no linear term: least absolute deviations.
    pub fn least_absolute(design: Matrix, targets: Vector) -> Result<Self> {
        let (n, p) = design.shape();
        Self::new(
            design,
            targets,
            Vector::from_element(n, 1.0),
            Vector::zeros(p),
        )
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn targets(&self) -> &Vector {
        &self.targets
    }

    pub fn residuals(&self, beta: &Vector) -> Vector {
        &self.targets - &self.design * beta
    }

    fn smoothed(&self, eps: f64) -> SmoothedL1<'_> {
        SmoothedL1 { inner: self, eps }
    }

    /// Scale used to make tolerances relative.
    fn magnitude(&self) -> f64 {
        let mut s = self.linear.norm();
        for (i, w) in self.weights.iter().enumerate() {
            s += w * self.design.row(i).norm();
        }
        s.max(1e-300)
    }
}

impl ConvexObjective for L1Objective {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let r = self.residuals(beta);
        r.iter()
            .zip(self.weights.iter())
            .map(|(r, w)| w * r.abs())
            .sum::<f64>()
            + self.linear.dot(beta)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::NonSmooth
    }
}

/// `Σ w_i sqrt(r_i² + ε²) + c'β`.
struct SmoothedL1<'a> {
    inner: &'a L1Objective,
    eps: f64,
}

impl ConvexObjective for SmoothedL1<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let r = self.inner.residuals(beta);
        let e2 = self.eps * self.eps;
        r.iter()
            .zip(self.inner.weights.iter())
            .map(|(r, w)| w * (r * r + e2).sqrt())
            .sum::<f64>()
            + self.inner.linear.dot(beta)
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        let r = self.inner.residuals(beta);
        let e2 = self.eps * self.eps;
        let mut g = self.inner.linear.clone();
        for (i, r) in r.iter().enumerate() {
            let coef = -self.inner.weights[i] * r / (r * r + e2).sqrt();
            g += self.inner.design.row(i).transpose() * coef;
        }
        Some(g)
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        let r = self.inner.residuals(beta);
        let e2 = self.eps * self.eps;
        let w = r.iter().zip(self.inner.weights.iter()).map(|(r, w)| {
            let d = r * r + e2;
            w * e2 / (d * d.sqrt())
        });
        Some(linalg::weighted_gram(&self.inner.design, w))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// Distance from zero to the subdifferential of `obj` at `beta`.
///
/// Residuals with `|r_i| ≤ zero_tol·(1 + |y_i|)` are treated as exact zeros
/// whose sign multipliers may range over `[−1, 1]`; the best multipliers are
/// found by box-constrained least squares (cyclic coordinate descent).
pub fn subgradient_certificate(obj: &L1Objective, beta: &Vector, zero_tol: f64) -> f64 {
    let r = obj.residuals(beta);
    let mut fixed = obj.linear.clone();
    let mut free: Vec<Vector> = Vec::new();
    for (i, ri) in r.iter().enumerate() {
        let w = obj.weights[i];
        if w == 0.0 {
            continue;
        }
        let row = obj.design.row(i).transpose() * w;
        if ri.abs() <= zero_tol * (1.0 + obj.targets[i].abs()) {
            free.push(row);
        } else {
            fixed -= row * ri.signum();
        }
    }
    if free.is_empty() {
        return fixed.norm();
    }
    // minimise |fixed − Σ s_j m_j| over s ∈ [−1, 1]^k
    let mut s = alloc::vec![0.0; free.len()];
    let mut resid = fixed.clone();
    let norms: Vec<f64> = free.iter().map(|m| m.norm_squared()).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for j in 0..free.len() {
            if norms[j] == 0.0 {
                continue;
            }
            let target = s[j] + free[j].dot(&resid) / norms[j];
            let new = target.clamp(-1.0, 1.0);
            let delta = new - s[j];
            if delta != 0.0 {
                resid -= &free[j] * delta;
                s[j] = new;
                moved = moved.max(delta.abs());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    resid.norm()
}

/// Minimises an [`L1Objective`].
///
/// In one dimension the minimiser is found exactly among the breakpoints
/// `y_i / x_i`; a flat minimising interval resolves to its midpoint. In
/// higher dimensions a smoothing homotopy (`ε = 1, 0.1, …, 1e−8`) is followed
/// by snapping to the vertex through the `p` smallest residuals and a
/// subgradient certificate.
pub fn solve_nonsmooth(obj: &L1Objective, start: &Vector, tol: f64) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    if start.len() != obj.dim() {
        return Err(Error::invalid("start point has the wrong dimension"));
    }
    if !obj.value(start).is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    if obj.dim() == 1 {
        solve_scalar(obj, tol)
    } else {
        solve_homotopy(obj, start, tol)
    }
}

fn solve_scalar(obj: &L1Objective, tol: f64) -> Result<SolveReport> {
    let c = obj.linear[0];
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(obj.targets.len());
    for i in 0..obj.targets.len() {
        let x = obj.design[(i, 0)];
        let a = obj.weights[i] * x.abs();
        if a > 0.0 {
            points.push((obj.targets[i] / x, a));
        }
    }
    let total: f64 = points.iter().map(|p| p.1).sum();
    let flat_tol = 1e-12 * (total + c.abs());
    let unbounded = |dir: f64| {
        let mut report = SolveReport {
            argmin: Vector::from_element(1, dir * f64::INFINITY),
            value: f64::NEG_INFINITY,
            certificate_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
            divergence_direction: Some(Vector::from_element(1, dir)),
        };
        report.argmin[0] = dir * f64::INFINITY;
        Error::MonotoneObjective(alloc::boxed::Box::new(report))
    };
    if points.is_empty() {
        if c.abs() <= flat_tol {
            return Err(Error::DegenerateData(
                "objective does not depend on the parameter",
            ));
        }
        return Err(unbounded(-c.signum()));
    }
    if c - total > flat_tol {
        return Err(unbounded(-1.0));
    }
    if c + total < -flat_tol {
        return Err(unbounded(1.0));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    // merge equal breakpoints
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for (b, a) in points {
        match merged.last_mut() {
            Some(last) if last.0 == b => last.1 += a,
            _ => merged.push((b, a)),
        }
    }

    let mut left = 0.0;
    let mut chosen = merged[merged.len() - 1].0;
    for (k, &(b, a)) in merged.iter().enumerate() {
        left += a;
        // right derivative just after b
        let right_slope = 2.0 * left - total + c;
        if right_slope.abs() <= flat_tol {
            chosen = match merged.get(k + 1) {
                Some(&(next, _)) => 0.5 * (b + next),
                None => b,
            };
            break;
        }
        if right_slope > 0.0 {
            chosen = b;
            break;
        }
    }
    let beta = Vector::from_element(1, chosen);
    let cert = scalar_certificate(&merged, total, c, chosen);
    let report = SolveReport {
        value: obj.value(&beta),
        argmin: beta,
        certificate_norm: cert,
        iterations: merged.len(),
        converged: cert <= tol,
        divergence_direction: None,
    };
    if !report.converged {
        return Err(Error::NoCertificate { residual: cert });
    }
    Ok(report)
}

fn scalar_certificate(merged: &[(f64, f64)], total: f64, c: f64, t: f64) -> f64 {
    let below: f64 = merged.iter().filter(|p| p.0 < t).map(|p| p.1).sum();
    let at: f64 = merged.iter().filter(|p| p.0 == t).map(|p| p.1).sum();
    let above = total - below - at;
    let lo = below - above - at + c;
    let hi = below - above + at + c;
    if lo > 0.0 {
        lo
    } else if hi < 0.0 {
        -hi
    } else {
        0.0
    }
}

fn solve_homotopy(obj: &L1Objective, start: &Vector, tol: f64) -> Result<SolveReport> {
    let magnitude = obj.magnitude();
    let opts = SmoothOptions {
        max_iter: 500,
        ..SmoothOptions::default()
    };
    let mut beta = start.clone();
    let mut iterations = 0;
    let mut eps: f64 = 1.0;
    loop {
        let stage = obj.smoothed(eps);
        let stage_tol = (1e-12 * magnitude).max(tol * 1e-3);
        match solve_smooth_with(&stage, &beta, stage_tol, &opts) {
            Ok(r) => {
                iterations += r.iterations;
                beta = r.argmin;
            }
            Err(Error::MonotoneObjective(r)) => return Err(Error::MonotoneObjective(r)),
            Err(e) => return Err(e),
        }
        if eps <= 1e-8 {
            break;
        }
        eps = (eps * 0.1).max(1e-8);
    }

    let mut best = beta.clone();
    let mut best_cert = subgradient_certificate(obj, &beta, 1e-7);
    if let Some(vertex) = snap_to_vertex(obj, &beta) {
        let cert = subgradient_certificate(obj, &vertex, 1e-9);
        if obj.value(&vertex) <= obj.value(&beta) + 1e-12 * (1.0 + obj.value(&beta).abs())
            && cert <= best_cert
        {
            best = vertex;
            best_cert = cert;
        }
    }
    let report = SolveReport {
        value: obj.value(&best),
        argmin: best,
        certificate_norm: best_cert,
        iterations,
        converged: best_cert <= tol,
        divergence_direction: None,
    };
    if !report.converged {
        return Err(Error::NoCertificate {
            residual: best_cert,
        });
    }
    Ok(report)
}

/// Interpolates the `p` observations with the smallest residuals (skipping
/// rows that are linearly dependent on those already chosen).
fn snap_to_vertex(obj: &L1Objective, beta: &Vector) -> Option<Vector> {
    let r = obj.residuals(beta);
    let p = obj.dim();
    let mut order: Vec<usize> = (0..r.len()).filter(|&i| obj.weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()));
    let mut rows: Vec<usize> = Vec::with_capacity(p);
    for i in order {
        let mut candidate = rows.clone();
        candidate.push(i);
        let sub = Matrix::from_fn(candidate.len(), p, |a, b| obj.design[(candidate[a], b)]);
        if linalg::has_full_column_rank(&sub.transpose()) {
            rows = candidate;
            if rows.len() == p {
                break;
            }
        }
    }
    if rows.len() < p {
        return None;
    }
    let a = Matrix::from_fn(p, p, |i, j| obj.design[(rows[i], j)]);
    let b = Vector::from_fn(p, |i, _| obj.targets[rows[i]]);
    let x = a.lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn location(ys: &[f64]) -> L1Objective {
        L1Objective::least_absolute(
            Matrix::from_element(ys.len(), 1, 1.0),
            Vector::from_row_slice(ys),
        )
        .unwrap()
    }

    #[test]
    fn sample_median_of_three() {
        let r = solve_nonsmooth(&location(&[1.0, 2.0, 9.0]), &Vector::zeros(1), 1e-10).unwrap();
        assert_eq!(r.argmin[0], 2.0);
        assert_eq!(r.value, 8.0);
    }

    #[test]
    fn flat_interval_resolves_to_midpoint() {
        let r = solve_nonsmooth(&location(&[0.0, 10.0]), &Vector::zeros(1), 1e-10).unwrap();
        assert_eq!(r.argmin[0], 5.0);
    }

    #[test]
    fn lad_three_point_design() {
        let x = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let obj = L1Objective::least_absolute(x, Vector::from_row_slice(&[1.0, 2.0, 3.0])).unwrap();
        let r = solve_nonsmooth(&obj, &Vector::zeros(2), 1e-8).unwrap();
        assert!((r.argmin[0] - 1.0).abs() < 1e-12 && (r.argmin[1] - 2.0).abs() < 1e-12);
        assert!(r.certificate_norm <= 1e-8);
    }

    #[test]
    fn unbounded_linear_term_is_monotone() {
        let obj = L1Objective::new(
            Matrix::from_element(2, 1, 1.0),
            Vector::from_row_slice(&[0.0, 1.0]),
            Vector::from_element(2, 1.0),
            Vector::from_element(1, 3.0),
        )
        .unwrap();
        assert!(matches!(
            solve_nonsmooth(&obj, &Vector::zeros(1), 1e-8),
            Err(Error::MonotoneObjective(_))
        ));
    }

    #[test]
    fn certificate_detects_non_optimal_points() {
        let obj = location(&[1.0, 2.0, 9.0]);
        assert_eq!(
            subgradient_certificate(&obj, &Vector::from_element(1, 2.0), 1e-12),
            0.0
        );
        assert!(subgradient_certificate(&obj, &Vector::from_element(1, 5.0), 1e-12) > 0.5);
    }
}
