use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::engine::median_sorted;
use super::generate::replication_seed;
use super::theory::quantile_process_covariance;
use crate::asymptotics::{bernoulli_lindeberg, logsumexp_expand, LindebergOptions, LogSumExp};
use crate::distributions::ErrorLaw;
use crate::error::{Error, Result};
use crate::estimators::{fit_quantile, posterior_mean_1d, Dataset, Prior};
use crate::linalg::{frobenius_relative, inverse_spd, min_eigenvalue, symmetrize, Matrix, Vector};

fn normal_law() -> ErrorLaw {
    ErrorLaw::Normal
}
fn double_exponential() -> ErrorLaw {
    ErrorLaw::DoubleExponential
}
fn one() -> f64 {
    1.0
}
fn sqrt_two() -> f64 {
    core::f64::consts::SQRT_2
}

fn sample_covariance(rows: &[Vector]) -> Matrix {
    let p = rows.first().map_or(0, |r| r.len());
    let r = rows.len() as f64;
    let mean = rows.iter().fold(Vector::zeros(p), |acc, v| acc + v) / r;
    let mut cov = Matrix::zeros(p, p);
    for v in rows {
        let d = v - &mean;
        cov.ger(1.0 / (r - 1.0), &d, &d, 1.0);
    }
    symmetrize(&cov)
}

// ---------------------------------------------------------------------------
// Quantile process

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileProcessConfig {
    pub n: usize,
    pub replications: usize,
    #[serde(default = "quartiles")]
    pub levels: Vec<f64>,
    #[serde(default = "normal_law")]
    pub error: ErrorLaw,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn quartiles() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileProcessReport {
    pub levels: Vec<f64>,
    pub n: usize,
    pub replications: usize,
    pub empirical: Matrix,
    pub theory: Matrix,
    /// Largest `|empirical − theory| / |theory|` over entries.
    pub max_relative_entry: f64,
    pub frobenius_relative: f64,
}

/// Simulates `Z_n(p) = √n (Q_{n,p} − μ_p)` on a grid of levels and compares
/// its covariance with `p₁(1−p₂) / (f(μ_{p₁}) f(μ_{p₂}))`.
pub fn quantile_process_check(cfg: &QuantileProcessConfig) -> Result<QuantileProcessReport> {
    cfg.error.validate()?;
    if cfg.levels.is_empty() || cfg.levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::invalid("levels must lie in (0, 1)"));
    }
    if cfg.n < 1 || cfg.replications < 2 {
        return Err(Error::invalid("need n ≥ 1 and at least two replications"));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let targets: Vec<f64> = cfg
        .levels
        .iter()
        .map(|&p| cfg.sigma * cfg.error.quantile(p))
        .collect();
    let root_n = (cfg.n as f64).sqrt();
    let mut rows = Vec::with_capacity(cfg.replications);
    for rep in 0..cfg.replications as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(cfg.seed, rep));
        let y: Vec<f64> = (0..cfg.n)
            .map(|_| cfg.sigma * cfg.error.sample(&mut rng))
            .collect();
        let data = Dataset::location(y)?;
        let mut z = Vector::zeros(cfg.levels.len());
        for (j, &p) in cfg.levels.iter().enumerate() {
            z[j] = root_n * (fit_quantile(&data, p)?.beta_hat[0] - targets[j]);
        }
        rows.push(z);
    }
    let empirical = sample_covariance(&rows);
    let theory = quantile_process_covariance(&cfg.error, cfg.sigma, &cfg.levels);
    let max_relative_entry = empirical
        .iter()
        .zip(theory.iter())
        .map(|(e, t)| (e - t).abs() / t.abs())
        .fold(0.0, f64::max);
    Ok(QuantileProcessReport {
        levels: cfg.levels.clone(),
        n: cfg.n,
        replications: cfg.replications,
        frobenius_relative: frobenius_relative(&empirical, &theory),
        empirical,
        theory,
        max_relative_entry,
    })
}

// ---------------------------------------------------------------------------
// Bayes estimator against the MLE

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "prior", rename_all = "snake_case")]
pub enum PriorSpec {
    #[default]
    Flat,
    /// Density `exp(rate |θ|)`.
    ExpGrowth { rate: f64 },
}

impl PriorSpec {
    pub fn build(&self) -> Result<Prior> {
        match *self {
            PriorSpec::Flat => Ok(Prior::flat()),
            PriorSpec::ExpGrowth { rate } => Prior::exp_growth(rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesConfig {
    #[serde(default = "bayes_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "two_hundred")]
    pub replications: usize,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default = "double_exponential")]
    pub error: ErrorLaw,
    /// Error scale. The default makes the data Laplace with unit scale,
    /// matching the `τ = 1` likelihood.
    #[serde(default = "sqrt_two")]
    pub sigma: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub seed: u64,
}

fn bayes_grid() -> Vec<usize> {
    vec![100, 400, 1600]
}
fn two_hundred() -> usize {
    200
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig {
            n_grid: bayes_grid(),
            replications: 200,
            prior: PriorSpec::Flat,
            error: ErrorLaw::DoubleExponential,
            sigma: sqrt_two(),
            theta0: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesReport {
    pub n_grid: Vec<usize>,
    pub replications: usize,
    /// Median of `√n |θ* − θ̂|` per sample size.
    pub medians: Vec<f64>,
    /// `medians[i+1] / medians[i]`.
    pub ratios: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Median scaled gap between the posterior mean and the MLE along a grid
/// of sample sizes.
pub fn bayes_equivalence_check(cfg: &BayesConfig) -> Result<BayesReport> {
    cfg.error.validate()?;
    if cfg.n_grid.is_empty() || cfg.n_grid.contains(&0) || cfg.replications == 0 {
        return Err(Error::invalid(
            "n_grid and replications must be non-empty and positive",
        ));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let prior = cfg.prior.build()?;
    let mut medians = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let base = replication_seed(cfg.seed, n as u64);
        let mut gaps = Vec::with_capacity(cfg.replications);
        for rep in 0..cfg.replications as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(base, rep));
            let y = (0..n)
                .map(|_| cfg.theta0 + cfg.sigma * cfg.error.sample(&mut rng))
                .collect();
            gaps.push(posterior_mean_1d(&Dataset::location(y)?, &prior)?.gap);
        }
        gaps.sort_by(f64::total_cmp);
        medians.push(median_sorted(&gaps));
    }
    let ratios: Vec<f64> = medians.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(BayesReport {
        n_grid: cfg.n_grid.clone(),
        replications: cfg.replications,
        strictly_decreasing: medians.windows(2).all(|w| w[1] < w[0]),
        medians,
        ratios,
    })
}

// ---------------------------------------------------------------------------
// Argmin nearness for quadratic-plus-kink objectives

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// Magnitude of order `n^{-1/2}`.
    Vanishing,
    /// Magnitude between 1 and 100.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorollaryConfig {
    pub draws: usize,
    pub seed: u64,
    pub dim: usize,
    pub n: usize,
    /// Cycled through by draw index.
    pub perturbations: Vec<Perturbation>,
}

impl Default for CorollaryConfig {
    fn default() -> Self {
        CorollaryConfig {
            draws: 10_000,
            seed: 0,
            dim: 2,
            n: 100,
            perturbations: vec![
                Perturbation::None,
                Perturbation::Vanishing,
                Perturbation::Adversarial,
            ],
        }
    }
}

/// One draw of `A(s) = ½(s−β)'V(s−β) + ε|b's + c|` against `B(s) = ½(s−β)'V(s−β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryInstance {
    pub v: Matrix,
    pub beta: Vector,
    pub b: Vector,
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl CorollaryInstance {
    /// `(|α − β|, sup_{|s−β|≤δ} |A − B|, ½kδ²)` in closed form, with `α` the
    /// argmin of `A` and `k` the smallest eigenvalue of `V`.
    pub fn evaluate(&self) -> Result<(f64, f64, f64)> {
        let v_inv = inverse_spd(&self.v)?;
        let vb = &v_inv * &self.b;
        let bvb = self.b.dot(&vb);
        let level = self.b.dot(&self.beta) + self.c;
        let shift = if self.epsilon == 0.0 || bvb == 0.0 {
            Vector::zeros(self.beta.len())
        } else if level.abs() <= self.epsilon * bvb {
            // The kink binds: α sits on the hyperplane b's + c = 0.
            &vb * (level / bvb)
        } else {
            &vb * (self.epsilon * level.signum())
        };
        let distance = shift.norm();
        let delta_n = self.epsilon * (level.abs() + self.b.norm() * self.delta);
        let threshold = 0.5 * min_eigenvalue(&self.v) * self.delta * self.delta;
        Ok((distance, delta_n, threshold))
    }
}

fn random_corollary<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
    kind: Perturbation,
) -> CorollaryInstance {
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let a = Matrix::from_fn(dim, dim, |_, _| normal());
    let v = symmetrize(&(&a * a.transpose() + Matrix::identity(dim, dim) * 0.1));
    let beta = Vector::from_fn(dim, |_, _| normal());
    let b = Vector::from_fn(dim, |_, _| normal());
    let c = normal();
    let delta = (rng.random_range((0.01f64).ln()..(2.0f64).ln())).exp();
    let epsilon = match kind {
        Perturbation::None => 0.0,
        Perturbation::Vanishing => rng.random::<f64>() / (n as f64).sqrt(),
        Perturbation::Adversarial => rng.random_range(0.0..(100.0f64).ln()).exp(),
    };
    CorollaryInstance {
        v,
        beta,
        b,
        c,
        epsilon,
        delta,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryReport {
    pub draws: usize,
    /// Draws with `|α − β| ≥ δ`.
    pub far: usize,
    /// Draws with `Δ_n(δ) ≥ ½kδ²`.
    pub triggered: usize,
    /// Draws with `|α − β| ≥ δ` but `Δ_n(δ) < ½kδ²`.
    pub violations: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Counts draws where the argmin moves by at least `δ` while the sup
/// distance stays below `½kδ²`. The implication makes this zero.
pub fn basic_corollary_check(cfg: &CorollaryConfig) -> Result<CorollaryReport> {
    if cfg.dim == 0 || cfg.n == 0 || cfg.perturbations.is_empty() {
        return Err(Error::invalid(
            "dim, n and the perturbation menu must be non-empty",
        ));
    }
    let mut report = CorollaryReport {
        draws: cfg.draws,
        far: 0,
        triggered: 0,
        violations: 0,
        counterexamples: Vec::new(),
    };
    for draw in 0..cfg.draws {
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(cfg.seed, draw as u64));
        let kind = cfg.perturbations[draw % cfg.perturbations.len()];
        let inst = random_corollary(&mut rng, cfg.dim, cfg.n, kind);
        let (distance, delta_n, threshold) = inst.evaluate()?;
        let far = distance >= inst.delta;
        let triggered = delta_n >= threshold;
        report.far += far as usize;
        report.triggered += triggered as usize;
        if far && !triggered {
            report.violations += 1;
            if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                report.counterexamples.push(
                    Counterexample::new(draw)
                        .with("epsilon", &[inst.epsilon])
                        .with("delta", &[inst.delta])
                        .with("distance", &[distance])
                        .with("delta_n", &[delta_n])
                        .with("threshold", &[threshold]),
                );
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Property sweeps

/// Counterexamples kept per sweep.
pub const MAX_COUNTEREXAMPLES: usize = 5;

/// Inputs and outputs of a failing draw, as named arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub draw: usize,
    pub fields: Vec<(String, Vec<f64>)>,
}

impl Counterexample {
    fn new(draw: usize) -> Self {
        Counterexample {
            draw,
            fields: Vec::new(),
        }
    }
    fn with(mut self, name: &str, values: &[f64]) -> Self {
        self.fields.push((name.to_string(), values.to_vec()));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub name: &'static str,
    pub draws: usize,
    pub violations: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl SweepReport {
    fn new(name: &'static str) -> Self {
        SweepReport {
            name,
            draws: 0,
            violations: 0,
            counterexamples: Vec::new(),
        }
    }
    fn record(&mut self, ok: bool, example: impl FnOnce() -> Counterexample) {
        self.draws += 1;
        if !ok {
            self.violations += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(example());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub draws: usize,
    pub seed: u64,
    /// Multiplies the upper bounds under test. Values below 1 inject a
    /// deliberate fault.
    pub bound_scale: f64,
    /// Draws that also get finite-difference derivative checks.
    pub derivative_draws: usize,
    pub corollary_dim: usize,
    pub corollary_n: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            draws: 10_000,
            seed: 0,
            bound_scale: 1.0,
            derivative_draws: 1_000,
            corollary_dim: 2,
            corollary_n: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub sweeps: Vec<SweepReport>,
}

impl SweepSummary {
    pub fn violations(&self) -> usize {
        self.sweeps.iter().map(|s| s.violations).sum()
    }
    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

const EXPANSION_STREAM: u64 = 0xA2;
const LINDEBERG_STREAM: u64 = 0xA1;
const COROLLARY_STREAM: u64 = 0xC0;

struct ExpansionDraw {
    weights: Vec<f64>,
    a: Vec<f64>,
    t: f64,
}

fn random_expansion<R: Rng + ?Sized>(rng: &mut R) -> ExpansionDraw {
    let m = rng.random_range(1..=20);
    let log_w = 1e3f64.ln();
    let weights = (0..m)
        .map(|_| rng.random_range(-log_w..log_w).exp())
        .collect();
    let a = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    let t = rng.random_range(-2.0..2.0);
    ExpansionDraw { weights, a, t }
}

/// Relative agreement of an analytic derivative with a central difference,
/// measured against the natural scale `μ^order` of that derivative.
fn derivative_ok(analytic: f64, numeric: f64, mu: f64, order: i32) -> bool {
    let scale = analytic.abs().max(mu.powi(order)).max(1e-12);
    (analytic - numeric).abs() <= 1e-5 * scale
}

/// Runs the log-sum-exp expansion, Bernoulli Lindeberg sandwich and argmin
/// nearness sweeps, plus finite-difference checks of the expansion's
/// derivatives.
pub fn property_sweeps(cfg: &SweepConfig) -> Result<SweepSummary> {
    if cfg.draws == 0 {
        return Err(Error::invalid("draws must be positive"));
    }
    if !(cfg.bound_scale > 0.0) || !cfg.bound_scale.is_finite() {
        return Err(Error::invalid("bound_scale must be positive"));
    }
    let scale = cfg.bound_scale;

    let mut bounds = SweepReport::new("logsumexp_bounds");
    let mut derivatives = SweepReport::new("logsumexp_derivatives");
    let base = replication_seed(cfg.seed, EXPANSION_STREAM);
    for draw in 0..cfg.draws {
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(base, draw as u64));
        let d = random_expansion(&mut rng);
        let r = logsumexp_expand(&d.weights, &d.a, d.t)?;
        let slack = 1e-12 * (1.0 + r.quadratic * d.t * d.t);
        let ok = r.remainder.abs() <= scale * r.bound_cubic + slack
            && r.remainder.abs() <= scale * r.bound_tight + slack;
        bounds.record(ok, || {
            Counterexample::new(draw)
                .with("weights", &d.weights)
                .with("a", &d.a)
                .with("t", &[d.t])
                .with("remainder", &[r.remainder])
                .with("bound_cubic", &[r.bound_cubic])
                .with("bound_tight", &[r.bound_tight])
        });

        if draw < cfg.derivative_draws {
            let k = LogSumExp::new(&d.weights, &d.a)?;
            let h = 1e-3 / r.mu.max(1.0);
            let (k1, k2, k3) = k.derivatives(d.t);
            let lo = k.derivatives(d.t - h);
            let hi = k.derivatives(d.t + h);
            let fd1 = (k.value(d.t + h) - k.value(d.t - h)) / (2.0 * h);
            let fd2 = (hi.0 - lo.0) / (2.0 * h);
            let fd3 = (hi.1 - lo.1) / (2.0 * h);
            let ok = derivative_ok(k1, fd1, r.mu, 1)
                && derivative_ok(k2, fd2, r.mu, 2)
                && derivative_ok(k3, fd3, r.mu, 3);
            derivatives.record(ok, || {
                Counterexample::new(draw)
                    .with("weights", &d.weights)
                    .with("a", &d.a)
                    .with("t", &[d.t])
                    .with("analytic", &[k1, k2, k3])
                    .with("finite_difference", &[fd1, fd2, fd3])
            });
        }
    }

    let mut sandwich = SweepReport::new("lindeberg_sandwich");
    let base = replication_seed(cfg.seed, LINDEBERG_STREAM);
    let opts = LindebergOptions::default();
    for draw in 0..cfg.draws {
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(base, draw as u64));
        let m = rng.random_range(1..=30);
        let z: Vec<f64> = (0..m)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * rng.random_range(-2.0f64..2.0).exp())
            .collect();
        let q: Vec<f64> = (0..m).map(|_| rng.random_range(0.001..0.999)).collect();
        let r = bernoulli_lindeberg(&z, &q, &opts)?;
        let l = r.lindeberg_values.as_deref().unwrap_or_default();
        let n2 = r.n_double_delta.as_deref().unwrap_or_default();
        let ok = l
            .iter()
            .zip(&r.n_values)
            .zip(n2)
            .all(|((l, n), n2)| 0.5 * n2 <= l + 1e-12 && *l <= scale * n + 1e-12);
        sandwich.record(ok, || {
            Counterexample::new(draw)
                .with("z", &z)
                .with("q", &q)
                .with("delta", &r.delta_grid)
                .with("lindeberg", l)
                .with("n_delta", &r.n_values)
                .with("n_double_delta", n2)
        });
    }

    let corollary = basic_corollary_check(&CorollaryConfig {
        draws: cfg.draws,
        seed: replication_seed(cfg.seed, COROLLARY_STREAM),
        dim: cfg.corollary_dim,
        n: cfg.corollary_n,
        ..CorollaryConfig::default()
    })?;
    let corollary = SweepReport {
        name: "basic_corollary",
        draws: corollary.draws,
        violations: corollary.violations,
        counterexamples: corollary.counterexamples,
    };

    Ok(SweepSummary {
        sweeps: vec![bounds, derivatives, sandwich, corollary],
    })
}
