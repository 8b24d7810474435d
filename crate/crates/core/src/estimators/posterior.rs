use alloc::boxed::Box;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{fit_quantile, Dataset};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Prior density known up to a constant, with a declared growth bound
/// `π(θ) ≤ c1 · exp(c2 |θ|)`.
pub struct Prior {
    density: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    c1: f64,
    c2: f64,
}

impl core::fmt::Debug for Prior {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Prior")
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .finish_non_exhaustive()
    }
}

impl Default for Prior {
    fn default() -> Self {
        Prior::flat()
    }
}

impl Prior {
    pub fn new(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite() && c2 >= 0.0 && c2.is_finite()) {
            return Err(Error::invalid(
                "prior growth constants must satisfy c1 > 0, c2 >= 0",
            ));
        }
        Ok(Prior {
            density: Box::new(density),
            c1,
            c2,
        })
    }

    pub fn flat() -> Self {
        Prior {
            density: Box::new(|_| 1.0),
            c1: 1.0,
            c2: 0.0,
        }
    }

    /// `π(θ) = exp(rate · |θ|)`.
    pub fn exp_growth(rate: f64) -> Result<Self> {
        Prior::new(move |t: f64| (rate * t.abs()).exp(), 1.0, rate.abs())
    }

    pub fn density(&self, theta: f64) -> f64 {
        (self.density)(theta)
    }

    pub fn growth(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub theta_star: f64,
    pub theta_mle: f64,
    /// `√n |θ* − θ̂|`.
    pub gap: f64,
}

const TAIL_RATIO: f64 = 1e-10;
const MAX_DOUBLINGS: u32 = 40;

/// Posterior mean of the double-exponential location (`τ = 1`) next to
/// the median MLE.
///
/// The log-likelihood `−Σ|y_i − θ|` is linear between order statistics, so
/// it is integrated piece by piece with O(1) work per evaluation.
pub fn posterior_mean_1d(data: &Dataset, prior: &Prior) -> Result<PosteriorSummary> {
    let y = data.continuous_response()?;
    let n = y.len();
    let mle = fit_quantile(data, 0.5)?.beta_hat[0];
    if prior.c2 >= n as f64 {
        return Err(Error::QuadratureFailure(
            "prior growth outpaces the likelihood",
        ));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let loglik = |t: f64| -sorted.iter().map(|v| (v - t).abs()).sum::<f64>();
    let peak_log = loglik(mle);
    let prior_at = |t: f64| {
        let p = prior.density(t);
        if p >= 0.0 && p.is_finite() {
            Ok(p)
        } else {
            Err(Error::invalid(
                "prior density must be finite and nonnegative",
            ))
        }
    };
    let g = |t: f64| -> Result<f64> { Ok((loglik(t) - peak_log).exp() * prior_at(t)?) };

    let mut peak = g(mle)?;
    // The likelihood peaks at the median; a non-flat prior may move the
    // mode, so a spread of order statistics is probed too.
    let stride = (n / 64).max(1);
    for &v in sorted.iter().step_by(stride) {
        peak = peak.max(g(v)?);
    }
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::QuadratureFailure("integrand vanishes at the mode"));
    }

    let mut half = 20.0 / (n as f64).sqrt();
    let mut doublings = 0;
    while g(mle - half)? >= TAIL_RATIO * peak || g(mle + half)? >= TAIL_RATIO * peak {
        half *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !half.is_finite() {
            return Err(Error::QuadratureFailure(
                "tails not integrable within range cap",
            ));
        }
    }
    let (lo, hi) = (mle - half, mle + half);

    let mut breaks: Vec<f64> = sorted
        .iter()
        .copied()
        .chain([lo, hi, 0.0, mle])
        .filter(|t| (lo..=hi).contains(t))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let tol = 1e-13 * peak * (hi - lo);
    let mut mass = 0.0;
    let mut moment = 0.0;
    let mut level = loglik(lo) - peak_log;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        // d/dθ of −Σ|y − θ| on (a, b): #{y ≥ b} − #{y ≤ a}.
        let below = sorted.partition_point(|&v| v <= a);
        let above = n - sorted.partition_point(|&v| v < b);
        let slope = above as f64 - below as f64;
        let piece = |t: f64| (level + slope * (t - a)).exp() * prior.density(t);
        mass += adaptive_simpson(&piece, a, b, tol)?;
        moment += adaptive_simpson(&|t: f64| (t - mle) * piece(t), a, b, tol * half)?;
        level += slope * (b - a);
    }
    if !(mass > 0.0) {
        return Err(Error::QuadratureFailure("posterior mass is zero"));
    }
    let theta_star = mle + moment / mass;
    Ok(PosteriorSummary {
        theta_star,
        theta_mle: mle,
        gap: (n as f64).sqrt() * (theta_star - mle).abs(),
    })
}
