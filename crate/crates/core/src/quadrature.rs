//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = refine(f, a, b, fa, fm, fb, whole, tol, 50)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::QuadratureFailure("non-finite integrand"))
    }
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailure("non-finite integrand"));
    }
    if depth == 0 || delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Integrates over the whole line by mapping `x = t / (1 - t²)`.
pub fn integrate_real_line(f: &impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let g = |t: f64| {
        let d = 1.0 - t * t;
        if d <= 0.0 {
            return 0.0;
        }
        let x = t / d;
        let v = f(x) * (1.0 + t * t) / (d * d);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    Ok(adaptive_simpson(&g, -1.0, 0.0, 0.5 * tol)? + adaptive_simpson(&g, 0.0, 1.0, 0.5 * tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_pdf;

    #[test]
    fn integrates_polynomials_and_densities() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
        let mass = integrate_real_line(&normal_pdf, 1e-12).unwrap();
        assert!((mass - 1.0).abs() < 1e-9);
        let second = integrate_real_line(&|x: f64| x * x * normal_pdf(x), 1e-12).unwrap();
        assert!((second - 1.0).abs() < 1e-8);
    }
}
