use super::{ConvexObjective, SolveReport};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothOptions {
    pub max_iter: usize,
    /// Iterates beyond this norm trigger the divergence probe.
    pub divergence_norm: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        SmoothOptions {
            max_iter: 10_000,
            divergence_norm: 1e6,
            armijo: 1e-4,
        }
    }
}

/// Minimises a convex objective that has a gradient.
///
/// Newton steps are used while the Hessian admits a Cholesky factorisation;
/// otherwise a gradient step with a Barzilai–Borwein trial length. Every step
/// is backtracked until the Armijo condition holds. If the iterates run past
/// [`SmoothOptions::divergence_norm`], or the objective turns out to be
/// non-increasing along the normalised displacement from `start`, the call
/// fails with [`Error::MonotoneObjective`].
pub fn solve_smooth(obj: &dyn ConvexObjective, start: &Vector, tol: f64) -> Result<SolveReport> {
    solve_smooth_with(obj, start, tol, &SmoothOptions::default())
}

pub fn solve_smooth_with(
    obj: &dyn ConvexObjective,
    start: &Vector,
    tol: f64,
    opts: &SmoothOptions,
) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    if start.len() != obj.dim() {
        return Err(Error::invalid("start point has the wrong dimension"));
    }
    let mut beta = start.clone();
    let mut f = obj.value(&beta);
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut grad = obj
        .gradient(&beta)
        .ok_or_else(|| Error::invalid("solve_smooth needs a gradient"))?;
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteObjective);
    }

    let mut previous: Option<(Vector, Vector)> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut escaped = false;

    while iterations < opts.max_iter {
        let gnorm = grad.norm();
        if gnorm <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let newton = obj
            .hessian(&beta)
            .and_then(|h| linalg::cholesky_solve(&h, &(-&grad)))
            .filter(|d| d.dot(&grad) < 0.0);
        let direction = match newton {
            Some(d) => d,
            None => {
                let step = match &previous {
                    Some((s, y)) if s.dot(y) > 0.0 => s.dot(s) / s.dot(y),
                    _ => 1.0 / gnorm.max(1.0),
                };
                -&grad * step
            }
        };

        let slope = direction.dot(&grad);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            let trial = &beta + &direction * t;
            let ft = obj.value(&trial);
            if ft.is_finite() && ft <= f + opts.armijo * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, f_next)) = accepted else {
            break;
        };
        let g_next = obj.gradient(&next).expect("gradient checked above");
        if g_next.iter().any(|g| !g.is_finite()) {
            break;
        }
        previous = Some((&next - &beta, &g_next - &grad));
        let stalled = f_next >= f && (&next - &beta).norm() <= 1e-15 * (1.0 + beta.norm());
        beta = next;
        f = f_next;
        grad = g_next;
        if beta.norm() > opts.divergence_norm {
            escaped = true;
            break;
        }
        if stalled {
            break;
        }
    }
    if !converged && grad.norm() <= tol {
        converged = true;
    }

    let mut report = SolveReport {
        certificate_norm: grad.norm(),
        argmin: beta,
        value: f,
        iterations,
        converged: converged && !escaped,
        divergence_direction: None,
    };
    if let Some(direction) = divergence_probe(
        obj,
        start,
        &report.argmin,
        report.value,
        opts.divergence_norm,
    ) {
        report.converged = false;
        report.divergence_direction = Some(direction);
        return Err(Error::MonotoneObjective(alloc::boxed::Box::new(report)));
    }
    Ok(report)
}

/// Marches from `at` along the normalised displacement `at − start` with
/// doubling steps until the norm cap; returns the direction when the
/// objective never increases along the way.
fn divergence_probe(
    obj: &dyn ConvexObjective,
    start: &Vector,
    at: &Vector,
    f_at: f64,
    cap: f64,
) -> Option<Vector> {
    let displacement = at - start;
    let len = displacement.norm();
    if !(len > 0.0) {
        return None;
    }
    let direction = displacement / len;
    let mut step = 0.5 * (1.0 + at.norm());
    let mut f_prev = f_at;
    loop {
        let point = at + &direction * step;
        let f = obj.value(&point);
        if f.is_nan() || f > f_prev + 1e-12 * (1.0 + f_prev.abs()) {
            return None;
        }
        f_prev = f;
        if point.norm() > cap {
            return Some(direction);
        }
        step *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{FnObjective, QuadraticModel};
    use crate::linalg::Matrix;
    use crate::special::log1pexp;

    #[test]
    fn half_squared_norm_minimised_at_origin() {
        let obj = FnObjective::twice_differentiable(
            3,
            |b: &Vector| 0.5 * b.norm_squared(),
            |b: &Vector| b.clone(),
            |_: &Vector| Matrix::identity(3, 3),
        );
        let start = Vector::from_row_slice(&[4.0, -2.0, 7.0]);
        let r = solve_smooth(&obj, &start, 1e-10).unwrap();
        assert!(r.converged);
        assert!(r.argmin.norm() < 1e-12);
        assert!(r.value.abs() < 1e-20);
    }

    #[test]
    fn quadratic_model_callback() {
        let q = QuadraticModel::new(
            Matrix::identity(2, 2),
            Vector::from_row_slice(&[1.0, 2.0]),
            0.0,
        )
        .unwrap();
        let r = solve_smooth(&q, &Vector::zeros(2), 1e-12).unwrap();
        assert!((r.argmin - Vector::from_row_slice(&[-1.0, -2.0])).norm() < 1e-12);
    }

    #[test]
    fn separated_logistic_is_monotone() {
        // x = (−1, 1), y = (0, 1): −loglik = log1p(e^{−β}) + log1p(e^{−β}).
        let obj = FnObjective::twice_differentiable(
            1,
            |b: &Vector| 2.0 * log1pexp(-b[0]),
            |b: &Vector| Vector::from_element(1, -2.0 * crate::special::logistic(-b[0])),
            |b: &Vector| {
                let q = crate::special::logistic(b[0]);
                Matrix::from_element(1, 1, 2.0 * q * (1.0 - q))
            },
        );
        match solve_smooth(&obj, &Vector::zeros(1), 1e-8) {
            Err(Error::MonotoneObjective(report)) => {
                let d = report.divergence_direction.unwrap();
                assert!((d[0] - 1.0).abs() < 1e-12);
                assert!(!report.converged);
            }
            other => panic!("expected MonotoneObjective, got {other:?}"),
        }
    }

    #[test]
    fn gradient_only_objective_uses_gradient_steps() {
        // Σ|t − y|^1.5 for y = (0, 1): symmetric, minimiser 0.5.
        let ys = [0.0, 1.0];
        let obj = FnObjective::with_gradient(
            1,
            move |b: &Vector| ys.iter().map(|y| (b[0] - y).abs().powf(1.5)).sum(),
            move |b: &Vector| {
                let g = ys
                    .iter()
                    .map(|y| 1.5 * (b[0] - y).signum() * (b[0] - y).abs().sqrt())
                    .sum();
                Vector::from_element(1, g)
            },
        );
        let r = solve_smooth(&obj, &Vector::zeros(1), 1e-12).unwrap();
        assert!((r.argmin[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let obj = FnObjective::with_gradient(1, |_: &Vector| f64::NAN, |b: &Vector| b.clone());
        assert!(matches!(
            solve_smooth(&obj, &Vector::zeros(1), 1e-8),
            Err(Error::NonFiniteObjective)
        ));
    }
}
