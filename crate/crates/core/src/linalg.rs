//! Thin helpers over `nalgebra` for the small dense problems in this crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative threshold below which a singular value or eigenvalue counts as zero.
pub const RANK_TOL: f64 = 1e-10;

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() <= tol * scale
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &Matrix) -> Vector {
    let mut vals = SymmetricEigen::new(symmetrize(m)).eigenvalues;
    vals.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    vals
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_eigenvalues(m)[0]
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
fn sym_function(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mapped =
        Vector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| f(l)));
    &eig.eigenvectors * Matrix::from_diagonal(&mapped) * eig.eigenvectors.transpose()
}

/// True when the smallest eigenvalue is positive relative to the largest.
pub fn is_positive_definite(m: &Matrix) -> bool {
    let vals = sym_eigenvalues(m);
    if vals.is_empty() {
        return false;
    }
    let top = vals[vals.len() - 1];
    top > 0.0 && vals[0] > RANK_TOL * top
}

pub fn sqrt_spd(m: &Matrix) -> Result<Matrix> {
    if !is_positive_definite(m) {
        return Err(Error::SingularInformation);
    }
    Ok(sym_function(m, |l| l.sqrt()))
}

pub fn inv_sqrt_spd(m: &Matrix) -> Result<Matrix> {
    if !is_positive_definite(m) {
        return Err(Error::SingularInformation);
    }
    Ok(sym_function(m, |l| 1.0 / l.sqrt()))
}

pub fn inverse_spd(m: &Matrix) -> Result<Matrix> {
    if !is_positive_definite(m) {
        return Err(Error::SingularInformation);
    }
    match m.clone().cholesky() {
        Some(ch) => Ok(symmetrize(&ch.inverse())),
        None => Ok(sym_function(m, |l| 1.0 / l)),
    }
}

/// Solves `m x = b` by Cholesky; `None` when `m` is not numerically SPD.
pub fn cholesky_solve(m: &Matrix, b: &Vector) -> Option<Vector> {
    let ch = m.clone().cholesky()?;
    let x = ch.solve(b);
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Column rank test based on the singular values of `x`.
pub fn has_full_column_rank(x: &Matrix) -> bool {
    let (n, p) = x.shape();
    if p == 0 {
        return true;
    }
    if n < p || x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > RANK_TOL * max
}

/// `‖a − b‖_F / ‖b‖_F`.
pub fn frobenius_relative(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm()
}

/// `max_j |λ_j − 1|` over the eigenvalues of `T^{-1/2} E T^{-1/2}`.
pub fn max_relative_eigen_discrepancy(empirical: &Matrix, theory: &Matrix) -> Result<f64> {
    let w = inv_sqrt_spd(theory)?;
    let scaled = &w * empirical * &w;
    Ok(sym_eigenvalues(&scaled)
        .iter()
        .map(|l| (l - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Sum of `weight_i · x_i x_i'` over the rows of `x`.
pub fn weighted_gram(x: &Matrix, weights: impl Iterator<Item = f64>) -> Matrix {
    let p = x.ncols();
    let mut out = Matrix::zeros(p, p);
    for (i, w) in weights.enumerate() {
        if w == 0.0 {
            continue;
        }
        let row = x.row(i);
        for a in 0..p {
            let ra = w * row[a];
            for b in a..p {
                out[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            out[(a, b)] = out[(b, a)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_root_whitens() {
        let m = Matrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let w = inv_sqrt_spd(&m).unwrap();
        let id = &w * &m * &w;
        assert!((id - Matrix::identity(2, 2)).amax() < 1e-12);
        let s = sqrt_spd(&m).unwrap();
        assert!((&s * &s - &m).amax() < 1e-12);
    }

    #[test]
    fn rank_detection() {
        let full = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert!(has_full_column_rank(&full));
        let dup = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(!has_full_column_rank(&dup));
        assert!(inverse_spd(&(dup.transpose() * &dup)).is_err());
    }

    #[test]
    fn weighted_gram_matches_dense_product() {
        let x = Matrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 3.0, 1.0]);
        let w = [0.5, 2.0, 1.0];
        let g = weighted_gram(&x, w.iter().copied());
        let dense = x.transpose() * Matrix::from_diagonal(&Vector::from_row_slice(&w)) * &x;
        assert!((g - dense).amax() < 1e-12);
    }
}
