use alloc::vec::Vec;

use super::{solve_smooth, ConvexObjective, QuadraticModel, Smoothness};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub const DEFAULT_GRID_POINTS: usize = 101;

/// Result of comparing a convex function `A` with a quadratic approximation
/// `B` on the `δ`-ball around `B`'s argmin.
#[derive(Debug, Clone, PartialEq)]
pub struct NearnessReport {
    pub delta: f64,
    /// Grid approximation of `sup |A − B|` over the ball.
    pub delta_n: f64,
    /// `inf` over the sphere of `B − min B`, i.e. `½kδ²`.
    pub h_n: f64,
    pub argmin_distance: f64,
    /// False only when `|argmin A − argmin B| ≥ δ` although `Δ_n < ½h_n`.
    pub bound_holds: bool,
    pub grid_points: usize,
}

/// Evaluates the argmin-nearness implication for `A` against `B`.
///
/// The sup is taken over the points of a `points_per_axis^p` lattice that
/// fall inside the closed ball. The argmin of `A` is located with
/// [`solve_smooth`] started at `B`'s argmin, using central differences when
/// `A` has no gradient.
pub fn argmin_nearness_bound(
    a: &dyn ConvexObjective,
    b: &QuadraticModel,
    delta: f64,
    points_per_axis: usize,
) -> Result<NearnessReport> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid("A and B live in different dimensions"));
    }
    if points_per_axis == 0 {
        return Err(Error::EmptyGrid);
    }
    let center = b.argmin();
    let p = center.len();

    let axis: Vec<f64> = if points_per_axis == 1 {
        alloc::vec![0.0]
    } else {
        (0..points_per_axis)
            .map(|k| -delta + 2.0 * delta * k as f64 / (points_per_axis - 1) as f64)
            .collect()
    };
    let mut index = alloc::vec![0usize; p];
    let mut sup = 0.0f64;
    let mut count = 0usize;
    'grid: loop {
        let offset = Vector::from_fn(p, |j, _| axis[index[j]]);
        if offset.norm() <= delta * (1.0 + 1e-12) {
            let s = &center + &offset;
            sup = sup.max((a.value(&s) - b.value(&s)).abs());
            count += 1;
        }
        for i in index.iter_mut() {
            *i += 1;
            if *i < axis.len() {
                continue 'grid;
            }
            *i = 0;
        }
        break;
    }
    if count == 0 {
        return Err(Error::EmptyGrid);
    }

    let h_n = 0.5 * b.min_eigenvalue() * delta * delta;
    let argmin_a = locate_argmin(a, &center)?;
    let distance = (&argmin_a - &center).norm();
    let bound_holds = distance < delta || sup >= 0.5 * h_n;
    Ok(NearnessReport {
        delta,
        delta_n: sup,
        h_n,
        argmin_distance: distance,
        bound_holds,
        grid_points: count,
    })
}

fn locate_argmin(a: &dyn ConvexObjective, start: &Vector) -> Result<Vector> {
    let tol = 1e-10 * (1.0 + a.value(start).abs());
    if a.gradient(start).is_some() {
        return Ok(solve_smooth(a, start, tol)?.argmin);
    }
    let fd = FiniteDifference(a);
    Ok(solve_smooth(&fd, start, tol.max(1e-7))?.argmin)
}

struct FiniteDifference<'a>(&'a dyn ConvexObjective);

impl ConvexObjective for FiniteDifference<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, beta: &Vector) -> f64 {
        self.0.value(beta)
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        Some(Vector::from_fn(beta.len(), |j, _| {
            let h = 1e-6 * (1.0 + beta[j].abs());
            let mut up = beta.clone();
            up[j] += h;
            let mut down = beta.clone();
            down[j] -= h;
            (self.0.value(&up) - self.0.value(&down)) / (2.0 * h)
        }))
    }

    fn hessian(&self, _beta: &Vector) -> Option<Matrix> {
        None
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::OnceDifferentiable
    }
}
