//! Error laws available to the simulation menus.
//!
//! Every law is symmetric about zero and scaled to unit variance.

use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ErrorLaw {
    Normal,
    /// Laplace with scale `1/√2`.
    DoubleExponential,
    /// Student t with `nu > 2` degrees of freedom, rescaled by `√((ν−2)/ν)`.
    StudentT {
        nu: f64,
    },
}

impl ErrorLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ErrorLaw::StudentT { nu } if !(nu > 2.0) || !nu.is_finite() => Err(
                Error::UnknownMenuItem(alloc::format!("student_t with nu = {nu} (need nu > 2)")),
            ),
            _ => Ok(()),
        }
    }

    fn t_scale(nu: f64) -> f64 {
        ((nu - 2.0) / nu).sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ErrorLaw::Normal => special::normal_pdf(x),
            ErrorLaw::DoubleExponential => FRAC_1_SQRT_2 * (-SQRT_2 * x.abs()).exp(),
            ErrorLaw::StudentT { nu } => {
                let s = Self::t_scale(nu);
                special::student_t_pdf(x / s, nu) / s
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ErrorLaw::Normal => special::normal_cdf(x),
            ErrorLaw::DoubleExponential => {
                if x < 0.0 {
                    0.5 * (SQRT_2 * x).exp()
                } else {
                    1.0 - 0.5 * (-SQRT_2 * x).exp()
                }
            }
            ErrorLaw::StudentT { nu } => special::student_t_cdf(x / Self::t_scale(nu), nu),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            ErrorLaw::Normal => special::normal_quantile(p),
            ErrorLaw::DoubleExponential => {
                if p < 0.5 {
                    FRAC_1_SQRT_2 * (2.0 * p).ln()
                } else {
                    -FRAC_1_SQRT_2 * (2.0 * (1.0 - p)).ln()
                }
            }
            ErrorLaw::StudentT { .. } => special::invert_cdf(|x| self.cdf(x), p),
        }
    }

    /// `E|ε|^r` for `r > −1` (finite only when `r < ν` for Student t).
    pub fn abs_moment(&self, r: f64) -> Result<f64> {
        if !(r > -1.0) {
            return Err(Error::invalid("absolute moment order must exceed -1"));
        }
        match *self {
            ErrorLaw::Normal => Ok((0.5 * r * core::f64::consts::LN_2
                + special::ln_gamma(0.5 * (r + 1.0)))
            .exp()
                / core::f64::consts::PI.sqrt()),
            ErrorLaw::DoubleExponential => {
                Ok(FRAC_1_SQRT_2.powf(r) * special::ln_gamma(r + 1.0).exp())
            }
            ErrorLaw::StudentT { nu } => {
                if r >= nu {
                    return Err(Error::invalid(
                        "moment order must be below the degrees of freedom",
                    ));
                }
                // x = u^m with m(r+1) ≥ 1 removes the singularity at zero,
                // u = s/(1−s) maps the half line to [0, 1).
                let m = (1.0 / (r + 1.0)).max(1.0);
                let f = |s: f64| {
                    if s >= 1.0 {
                        return 0.0;
                    }
                    let u = s / (1.0 - s);
                    // x^r dx = m u^{m(r+1)−1} du, bounded at u = 0.
                    let weight = m * u.powf(m * (r + 1.0) - 1.0) / ((1.0 - s) * (1.0 - s));
                    2.0 * weight * self.pdf(u.powf(m))
                };
                adaptive_simpson(&f, 0.0, 1.0, 1e-12)
            }
        }
    }

    /// `∫_c^∞ x f(x) dx` for `c ≥ 0`.
    pub fn upper_partial_mean(&self, c: f64) -> f64 {
        let c = c.abs();
        match *self {
            ErrorLaw::Normal => special::normal_pdf(c),
            ErrorLaw::DoubleExponential => 0.5 * (c + FRAC_1_SQRT_2) * (-SQRT_2 * c).exp(),
            ErrorLaw::StudentT { nu } => {
                let s = Self::t_scale(nu);
                let z = c / s;
                s * (nu + z * z) / (nu - 1.0) * special::student_t_pdf(z, nu)
            }
        }
    }

    /// `E|u + ε|`; its derivative in `u` is `2F(u) − 1`.
    pub fn expected_abs_shift(&self, u: f64) -> f64 {
        u * (2.0 * self.cdf(u) - 1.0) + 2.0 * self.upper_partial_mean(u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ErrorLaw::Normal => StandardNormal.sample(rng),
            ErrorLaw::DoubleExponential => {
                let e: f64 = Exp1.sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * e * FRAC_1_SQRT_2
            }
            ErrorLaw::StudentT { nu } => {
                let t: f64 = StudentT::new(nu)
                    .expect("validated degrees of freedom")
                    .sample(rng);
                t * Self::t_scale(nu)
            }
        }
    }
}
