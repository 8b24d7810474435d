use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// `K(t) = log Σ w_i exp(a_i t)` for nonnegative weights, not all zero.
/// Entries with zero weight are dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExp {
    log_w: Vec<f64>,
    a: Vec<f64>,
}

impl LogSumExp {
    pub fn new(weights: &[f64], a: &[f64]) -> Result<Self> {
        if weights.len() != a.len() {
            return Err(Error::invalid("weights and coefficients differ in length"));
        }
        if weights.iter().chain(a).any(|v| !v.is_finite()) || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid(
                "weights must be finite and nonnegative, coefficients finite",
            ));
        }
        let (log_w, a): (Vec<f64>, Vec<f64>) = weights
            .iter()
            .zip(a)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, a)| (w.ln(), *a))
            .unzip();
        if log_w.is_empty() {
            return Err(Error::AllZeroWeights);
        }
        Ok(LogSumExp { log_w, a })
    }

    pub fn value(&self, t: f64) -> f64 {
        let top = self.exponents(t).fold(f64::NEG_INFINITY, f64::max);
        top + self.exponents(t).map(|e| (e - top).exp()).sum::<f64>().ln()
    }

    fn exponents(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.log_w
            .iter()
            .zip(&self.a)
            .map(move |(lw, a)| lw + a * t)
    }

    /// Tilted weights `v_i(t)`, summing to one.
    pub fn tilted(&self, t: f64) -> Vec<f64> {
        let k = self.value(t);
        self.exponents(t).map(|e| (e - k).exp()).collect()
    }

    /// `(K′(t), K″(t), K‴(t))`: mean, variance and third central moment of
    /// `a` under the tilted weights.
    pub fn derivatives(&self, t: f64) -> (f64, f64, f64) {
        let v = self.tilted(t);
        let mean: f64 = v.iter().zip(&self.a).map(|(v, a)| v * a).sum();
        let (mut m2, mut m3) = (0.0, 0.0);
        for (v, a) in v.iter().zip(&self.a) {
            let c = a - mean;
            m2 += v * c * c;
            m3 += v * c * c * c;
        }
        (mean, m2, m3)
    }
}

/// Second-order expansion of `K(t) − K(0)` with its exact remainder and
/// both remainder bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionReport {
    pub t: f64,
    /// `ā(0)`.
    pub linear: f64,
    /// `K″(0) = Σ v_i(0) (a_i − ā(0))²`.
    pub quadratic: f64,
    /// `v(t) = K(t) − K(0) − ā(0) t − ½ K″(0) t²`.
    pub remainder: f64,
    /// `(4/3) μ³ |t|³`.
    pub bound_cubic: f64,
    /// `(2/3) g(μ|t|) K″(0) t²` with `g(u) = u exp(2u + 4u²)`.
    pub bound_tight: f64,
    /// `μ = max |a_i − ā(0)|` over positive-weight entries.
    pub mu: f64,
}

impl ExpansionReport {
    pub fn bounds_hold(&self) -> bool {
        let slack = 1e-12 * (1.0 + self.quadratic * self.t * self.t);
        self.remainder.abs() <= self.bound_cubic + slack
            && self.remainder.abs() <= self.bound_tight + slack
    }
}

pub fn expansion_g(u: f64) -> f64 {
    u * (2.0 * u + 4.0 * u * u).exp()
}

/// Expands `log Σ w_i exp(a_i t) − log Σ w_i` to second order in `t`.
pub fn logsumexp_expand(weights: &[f64], a: &[f64], t: f64) -> Result<ExpansionReport> {
    if !t.is_finite() {
        return Err(Error::invalid("t must be finite"));
    }
    let k = LogSumExp::new(weights, a)?;
    let v0 = k.tilted(0.0);
    let (linear, quadratic, _) = k.derivatives(0.0);
    let centred: Vec<f64> = k.a.iter().map(|a| a - linear).collect();
    let mu = centred.iter().fold(0.0, |m: f64, c| m.max(c.abs()));

    // Work with centred coefficients so the linear term cancels exactly.
    let top = centred.iter().fold(f64::NEG_INFINITY, |m, c| m.max(c * t));
    let shifted = if top < 1.0 {
        let s: f64 = v0
            .iter()
            .zip(&centred)
            .map(|(v, c)| v * ((c * t).exp_m1() - c * t))
            .sum();
        s.ln_1p()
    } else {
        top + v0
            .iter()
            .zip(&centred)
            .map(|(v, c)| v * (c * t - top).exp())
            .sum::<f64>()
            .ln()
    };
    let remainder = shifted - 0.5 * quadratic * t * t;
    let at = mu * t.abs();
    Ok(ExpansionReport {
        t,
        linear,
        quadratic,
        remainder,
        bound_cubic: 4.0 / 3.0 * at * at * at,
        bound_tight: 2.0 / 3.0 * expansion_g(at) * quadratic * t * t,
        mu,
    })
}
