//! Convex objectives and their minimisers.
//!
//! [`solve_smooth`] handles objectives with a gradient (Newton with Armijo
//! backtracking, gradient steps when no usable Hessian exists) and reports
//! a typed [`Error::MonotoneObjective`](crate::Error::MonotoneObjective) when
//! the objective has no finite minimiser. [`solve_nonsmooth`] handles sums of
//! weighted absolute deviations, exactly in one dimension and by a smoothing
//! homotopy with a subgradient certificate otherwise.

mod nearness;
mod nonsmooth;
mod objective;
mod smooth;

pub use nearness::{argmin_nearness_bound, NearnessReport, DEFAULT_GRID_POINTS};
pub use nonsmooth::{solve_nonsmooth, subgradient_certificate, L1Objective};
pub use objective::{
    convexity_gap, gradient_fd_error, hessian_fd_error, ConvexObjective, FnObjective,
    QuadraticModel, Smoothness,
};
pub use smooth::{solve_smooth, solve_smooth_with, SmoothOptions};

use crate::linalg::Vector;

/// Outcome of a minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub argmin: Vector,
    pub value: f64,
    /// Gradient norm, or the distance from zero to the subdifferential.
    pub certificate_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Unit vector along which the objective was verified non-increasing.
    pub divergence_direction: Option<Vector>,
}
