use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Smoothness {
    TwiceDifferentiable,
    OnceDifferentiable,
    NonSmooth,
}

/// A convex function on `R^p`.
pub trait ConvexObjective {
    fn dim(&self) -> usize;

    fn value(&self, beta: &Vector) -> f64;

    fn gradient(&self, _beta: &Vector) -> Option<Vector> {
        None
    }

    fn hessian(&self, _beta: &Vector) -> Option<Matrix> {
        None
    }

    fn smoothness(&self) -> Smoothness;
}

/// Objective assembled from closures.
pub struct FnObjective<F, G = fn(&Vector) -> Vector, H = fn(&Vector) -> Matrix> {
    dim: usize,
    value: F,
    gradient: Option<G>,
    hessian: Option<H>,
    smoothness: Smoothness,
}

impl<F> FnObjective<F>
where
    F: Fn(&Vector) -> f64,
{
    pub fn value_only(dim: usize, value: F) -> Self {
        FnObjective {
            dim,
            value,
            gradient: None,
            hessian: None,
            smoothness: Smoothness::NonSmooth,
        }
    }
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&Vector) -> f64,
    G: Fn(&Vector) -> Vector,
{
    pub fn with_gradient(dim: usize, value: F, gradient: G) -> Self {
        FnObjective {
            dim,
            value,
            gradient: Some(gradient),
            hessian: None,
            smoothness: Smoothness::OnceDifferentiable,
        }
    }
}

impl<F, G, H> FnObjective<F, G, H>
where
    F: Fn(&Vector) -> f64,
    G: Fn(&Vector) -> Vector,
    H: Fn(&Vector) -> Matrix,
{
    pub fn twice_differentiable(dim: usize, value: F, gradient: G, hessian: H) -> Self {
        FnObjective {
            dim,
            value,
            gradient: Some(gradient),
            hessian: Some(hessian),
            smoothness: Smoothness::TwiceDifferentiable,
        }
    }
}

impl<F, G, H> ConvexObjective for FnObjective<F, G, H>
where
    F: Fn(&Vector) -> f64,
    G: Fn(&Vector) -> Vector,
    H: Fn(&Vector) -> Matrix,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, beta: &Vector) -> f64 {
        (self.value)(beta)
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        self.gradient.as_ref().map(|g| g(beta))
    }

    fn hessian(&self, beta: &Vector) -> Option<Matrix> {
        self.hessian.as_ref().map(|h| h(beta))
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }
}

/// `½ β'Vβ + U'β + C` with `V` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    v: Matrix,
    u: Vector,
    c: f64,
    min_eigenvalue: f64,
}

impl QuadraticModel {
    pub fn new(v: Matrix, u: Vector, c: f64) -> Result<Self> {
        if !v.is_square() || v.nrows() != u.len() || v.nrows() == 0 {
            return Err(Error::invalid("quadratic model dimensions disagree"));
        }
        if !linalg::is_symmetric(&v, 1e-12) {
            return Err(Error::invalid("V must be symmetric"));
        }
        let k = linalg::min_eigenvalue(&v);
        if k <= 0.0 || !k.is_finite() {
            return Err(Error::invalid("V must be positive definite"));
        }
        Ok(QuadraticModel {
            v,
            u,
            c,
            min_eigenvalue: k,
        })
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn u(&self) -> &Vector {
        &self.u
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Smallest eigenvalue `k` of `V`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `−V⁻¹U`.
    pub fn argmin(&self) -> Vector {
        match linalg::cholesky_solve(&self.v, &self.u) {
            Some(x) => -x,
            None => {
                -(self
                    .v
                    .clone()
                    .lu()
                    .solve(&self.u)
                    .expect("V is positive definite"))
            }
        }
    }
}

impl ConvexObjective for QuadraticModel {
    fn dim(&self) -> usize {
        self.u.len()
    }

    fn value(&self, beta: &Vector) -> f64 {
        0.5 * beta.dot(&(&self.v * beta)) + self.u.dot(beta) + self.c
    }

    fn gradient(&self, beta: &Vector) -> Option<Vector> {
        Some(&self.v * beta + &self.u)
    }

    fn hessian(&self, _beta: &Vector) -> Option<Matrix> {
        Some(self.v.clone())
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::TwiceDifferentiable
    }
}

/// `value(λβ₁+(1−λ)β₂) − λ·value(β₁) − (1−λ)·value(β₂)` minus the
/// rounding allowance `1e−10·(1+|value(β₁)|+|value(β₂)|)`. Convexity holds
/// when the result is `≤ 0`.
pub fn convexity_gap(obj: &dyn ConvexObjective, b1: &Vector, b2: &Vector, lambda: f64) -> f64 {
    let f1 = obj.value(b1);
    let f2 = obj.value(b2);
    let mid = obj.value(&(b1 * lambda + b2 * (1.0 - lambda)));
    mid - lambda * f1 - (1.0 - lambda) * f2 - 1e-10 * (1.0 + f1.abs() + f2.abs())
}

fn central_difference_gradient(obj: &dyn ConvexObjective, beta: &Vector) -> Vector {
    DVector::from_fn(beta.len(), |j, _| {
        let h = 1e-5 * (1.0 + beta[j].abs());
        let mut up = beta.clone();
        up[j] += h;
        let mut down = beta.clone();
        down[j] -= h;
        (obj.value(&up) - obj.value(&down)) / (2.0 * h)
    })
}

/// Relative error between the analytic gradient and central differences of
/// the value; `None` when the objective has no gradient.
pub fn gradient_fd_error(obj: &dyn ConvexObjective, beta: &Vector) -> Option<f64> {
    let g = obj.gradient(beta)?;
    let fd = central_difference_gradient(obj, beta);
    let scale = g
        .norm()
        .max(fd.norm())
        .max(1e-8 * (1.0 + obj.value(beta).abs()));
    Some((g - fd).norm() / scale)
}

/// Relative error between the analytic Hessian and central differences of
/// the analytic gradient.
pub fn hessian_fd_error(obj: &dyn ConvexObjective, beta: &Vector) -> Option<f64> {
    let h = obj.hessian(beta)?;
    obj.gradient(beta)?;
    let p = beta.len();
    let mut fd = Matrix::zeros(p, p);
    for j in 0..p {
        let step = 1e-5 * (1.0 + beta[j].abs());
        let mut up = beta.clone();
        up[j] += step;
        let mut down = beta.clone();
        down[j] -= step;
        let col = (obj.gradient(&up)? - obj.gradient(&down)?) / (2.0 * step);
        fd.set_column(j, &col);
    }
    let scale = h.norm().max(fd.norm()).max(1e-12);
    Some((h - fd).norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_model_argmin_is_minus_v_inverse_u() {
        let q = QuadraticModel::new(
            Matrix::identity(2, 2),
            Vector::from_row_slice(&[1.0, 2.0]),
            0.0,
        )
        .unwrap();
        assert_eq!(q.argmin(), Vector::from_row_slice(&[-1.0, -2.0]));
        assert_eq!(q.min_eigenvalue(), 1.0);
    }

    #[test]
    fn quadratic_model_rejects_indefinite_or_asymmetric() {
        let indefinite = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(QuadraticModel::new(indefinite, Vector::zeros(2), 0.0).is_err());
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(QuadraticModel::new(asym, Vector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn finite_difference_checks_accept_exact_derivatives() {
        let v = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let q = QuadraticModel::new(v, Vector::from_row_slice(&[0.5, -1.0]), 2.0).unwrap();
        let at = Vector::from_row_slice(&[0.3, -0.7]);
        assert!(gradient_fd_error(&q, &at).unwrap() < 1e-8);
        assert!(hessian_fd_error(&q, &at).unwrap() < 1e-8);
        assert!(convexity_gap(&q, &at, &Vector::zeros(2), 0.3) <= 0.0);
    }
}
