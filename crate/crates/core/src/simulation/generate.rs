use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use super::config::{DesignSpec, Link, ScenarioConfig};
use crate::error::{Error, Result};
use crate::estimators::{Dataset, Model, SurvivalRecord};
use crate::linalg::Matrix;
use crate::special::{logistic, normal_cdf};

/// Stream identifiers mixed into the base seed.
const DESIGN_STREAM: u64 = 0xD351_6E00_0000_0001;
const POPULATION_STREAM: u64 = 0xD351_6E00_0000_0002;

/// Rows drawn to stand in for a continuous covariate distribution.
pub const POPULATION_SAMPLE: usize = 1 << 16;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep`; depends only on `(base, rep)`.
pub fn replication_seed(base: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(base) ^ rep)
}

pub(crate) fn stream_rng(base: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replication_seed(base, stream))
}

/// Covariate rows with probabilities, standing in for `H` in population
/// calculations.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub rows: Matrix,
    pub weights: Vec<f64>,
    /// Support index per row (discrete designs), for table links.
    pub support_index: Vec<usize>,
    /// Whether the rows are the exact law or a Monte Carlo stand-in.
    pub exact: bool,
}

struct DesignDraw {
    x: Matrix,
    support_index: Vec<usize>,
}

fn draw_design(design: &DesignSpec, n: usize, rng: &mut ChaCha8Rng) -> DesignDraw {
    match design {
        DesignSpec::None => DesignDraw {
            x: Matrix::zeros(n, 0),
            support_index: Vec::new(),
        },
        DesignSpec::Gaussian { p, intercept, .. } => {
            let off = usize::from(*intercept);
            let mut x = Matrix::from_element(n, p + off, 1.0);
            for i in 0..n {
                for j in off..p + off {
                    x[(i, j)] = StandardNormal.sample(rng);
                }
            }
            DesignDraw {
                x,
                support_index: Vec::new(),
            }
        }
        DesignSpec::Uniform {
            p,
            low,
            high,
            intercept,
            ..
        } => {
            let off = usize::from(*intercept);
            let mut x = Matrix::from_element(n, p + off, 1.0);
            for i in 0..n {
                for j in off..p + off {
                    x[(i, j)] = low + (high - low) * rng.random::<f64>();
                }
            }
            DesignDraw {
                x,
                support_index: Vec::new(),
            }
        }
        DesignSpec::Discrete {
            support, weights, ..
        } => {
            let total: f64 = weights.iter().sum();
            let mut cumulative = Vec::with_capacity(weights.len());
            let mut acc = 0.0;
            for w in weights {
                acc += w / total;
                cumulative.push(acc);
            }
            let p = support[0].len();
            let mut x = Matrix::zeros(n, p);
            let mut idx = Vec::with_capacity(n);
            for i in 0..n {
                let u: f64 = rng.random();
                let k = cumulative
                    .partition_point(|&c| c <= u)
                    .min(support.len() - 1);
                for j in 0..p {
                    x[(i, j)] = support[k][j];
                }
                idx.push(k);
            }
            DesignDraw {
                x,
                support_index: idx,
            }
        }
        DesignSpec::Fixed { rows, .. } => {
            let p = rows[0].len();
            DesignDraw {
                x: Matrix::from_fn(n, p, |i, j| rows[i % rows.len()][j]),
                support_index: Vec::new(),
            }
        }
    }
}

/// Covariate law used by the theory oracles: the exact support for
/// discrete designs, the realised rows for fixed designs, a large seeded
/// sample otherwise.
pub fn population(scenario: &ScenarioConfig) -> Population {
    let spec = &scenario.design;
    match spec {
        DesignSpec::Discrete {
            support,
            weights,
            fixed: false,
        } => {
            let total: f64 = weights.iter().sum();
            let p = support[0].len();
            Population {
                rows: Matrix::from_fn(support.len(), p, |i, j| support[i][j]),
                weights: weights.iter().map(|w| w / total).collect(),
                support_index: (0..support.len()).collect(),
                exact: true,
            }
        }
        _ if spec.is_fixed() => {
            let d = draw_design(
                spec,
                scenario.n,
                &mut stream_rng(scenario.seed, DESIGN_STREAM),
            );
            let n = d.x.nrows();
            Population {
                rows: d.x,
                weights: alloc::vec![1.0 / n as f64; n],
                support_index: d.support_index,
                exact: true,
            }
        }
        _ => {
            let d = draw_design(
                spec,
                POPULATION_SAMPLE,
                &mut stream_rng(scenario.seed, POPULATION_STREAM),
            );
            Population {
                rows: d.x,
                weights: alloc::vec![1.0 / POPULATION_SAMPLE as f64; POPULATION_SAMPLE],
                support_index: d.support_index,
                exact: false,
            }
        }
    }
}

/// Probability of censoring under `C ~ Uniform(0, c)` and exponential
/// lifetimes with the given rates and weights.
fn censored_fraction(rates: &[f64], weights: &[f64], c: f64) -> f64 {
    rates
        .iter()
        .zip(weights)
        .map(|(r, w)| {
            let x = r * c;
            let f = if x < 1e-8 {
                1.0 - 0.5 * x
            } else {
                -(-x).exp_m1() / x
            };
            w * f
        })
        .sum()
}

/// Upper end `c` of the uniform censoring law that censors the target
/// fraction, by bisection on `log c`.
pub fn calibrate_censoring(rates: &[f64], weights: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid("censoring target must lie in (0, 1)"));
    }
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if censored_fraction(rates, weights, hi.exp()) > target
        || censored_fraction(rates, weights, lo.exp()) < target
    {
        return Err(Error::invalid("censoring target cannot be reached"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // The censored fraction decreases in c.
        if censored_fraction(rates, weights, mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Scenario-level state shared by all replications.
#[derive(Debug, Clone)]
pub struct Generator {
    scenario: ScenarioConfig,
    fixed_design: Option<(Matrix, Vec<usize>)>,
    censoring_bound: Option<f64>,
}

impl Generator {
    pub fn new(scenario: &ScenarioConfig) -> Result<Self> {
        scenario.validate()?;
        let fixed_design = scenario.design.is_fixed().then(|| {
            let d = draw_design(
                &scenario.design,
                scenario.n,
                &mut stream_rng(scenario.seed, DESIGN_STREAM),
            );
            (d.x, d.support_index)
        });
        let censoring_bound = match (scenario.model, scenario.censoring) {
            (Model::Cox | Model::ExpHazard { .. }, Some(target)) if target > 0.0 => {
                let pop = population(scenario);
                let base = baseline_rate(&scenario.model);
                let rates: Vec<f64> = (&pop.rows
                    * crate::linalg::Vector::from_row_slice(&scenario.theta0))
                .iter()
                .map(|e| base * e.exp())
                .collect();
                Some(calibrate_censoring(&rates, &pop.weights, target)?)
            }
            _ => None,
        };
        Ok(Generator {
            scenario: scenario.clone(),
            fixed_design,
            censoring_bound,
        })
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn censoring_bound(&self) -> Option<f64> {
        self.censoring_bound
    }

    /// Dataset of replication `rep`, deterministic in `(seed, rep)`.
    pub fn generate(&self, rep: u64) -> Result<Dataset> {
        let s = &self.scenario;
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(s.seed, rep));
        let (x, support_index) = match &self.fixed_design {
            Some((x, idx)) => (x.clone(), idx.clone()),
            None => {
                let d = draw_design(&s.design, s.n, &mut rng);
                (d.x, d.support_index)
            }
        };
        let n = s.n;
        let eta = |i: usize| -> f64 { x.row(i).iter().zip(&s.theta0).map(|(a, b)| a * b).sum() };
        match s.model {
            Model::Quantile { .. } | Model::LAlpha { .. } | Model::DoubleExponential => {
                let sigma = s.scale.eval(&[])?;
                let y = (0..n)
                    .map(|_| s.theta0[0] + sigma * s.error.sample(&mut rng))
                    .collect();
                Dataset::location(y)
            }
            Model::Ols | Model::Lad => {
                let mut y = Vec::with_capacity(n);
                for i in 0..n {
                    let row: Vec<f64> = x.row(i).iter().copied().collect();
                    let sigma = s.scale.eval(&row)?;
                    y.push(s.mean.eval(&row, &s.theta0) + sigma * s.error.sample(&mut rng));
                }
                Dataset::continuous(x, y)
            }
            Model::Logistic => {
                let y = (0..n)
                    .map(|i| {
                        let q = match &s.link {
                            Link::Logistic => logistic(eta(i)),
                            Link::Probit => normal_cdf(eta(i)),
                            Link::Cloglog => -(-eta(i).exp()).exp_m1(),
                            Link::Table { values } => values[support_index[i]],
                        };
                        if rng.random::<f64>() < q {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Dataset::binary(x, y)
            }
            Model::Poisson => {
                let mut y = Vec::with_capacity(n);
                for i in 0..n {
                    let mu = eta(i).exp();
                    let draw: f64 = Poisson::new(mu)
                        .map_err(|_| Error::invalid("Poisson mean out of range"))?
                        .sample(&mut rng);
                    y.push(draw as u64);
                }
                Dataset::count(x, y)
            }
            Model::Cox | Model::ExpHazard { .. } => {
                let base = baseline_rate(&s.model);
                let records = (0..n)
                    .map(|i| {
                        let e: f64 = Exp1.sample(&mut rng);
                        let t = (e / (base * eta(i).exp())).max(f64::MIN_POSITIVE);
                        match self.censoring_bound {
                            Some(c) => {
                                let cens = c * rng.random::<f64>();
                                if cens < t {
                                    SurvivalRecord {
                                        time: cens.max(f64::MIN_POSITIVE),
                                        event: false,
                                    }
                                } else {
                                    SurvivalRecord {
                                        time: t,
                                        event: true,
                                    }
                                }
                            }
                            None => SurvivalRecord {
                                time: t,
                                event: true,
                            },
                        }
                    })
                    .collect();
                Dataset::survival(x, records)
            }
            Model::MarkovPl => {
                Dataset::markov(markov_path(n, s.states, s.theta0[0], &mut rng), s.states)
            }
        }
    }
}

fn baseline_rate(model: &Model) -> f64 {
    match model {
        Model::ExpHazard { rate } => *rate,
        _ => 1.0,
    }
}

/// Exact draw from the chain whose full conditionals are
/// `f(j | neighbours) ∝ exp(β · #{neighbours equal to j})`: a stationary
/// uniform start and transfer matrix `P(a, b) ∝ exp(β I{a = b})`.
pub fn markov_path<R: Rng + ?Sized>(len: usize, k: usize, beta: f64, rng: &mut R) -> Vec<usize> {
    let stay = beta.exp() / (beta.exp() + (k - 1) as f64);
    let mut path = Vec::with_capacity(len);
    let mut state = rng.random_range(1..=k);
    for i in 0..len {
        if i > 0 && rng.random::<f64>() >= stay {
            let other = rng.random_range(1..k);
            state = if other >= state { other + 1 } else { other };
        }
        path.push(state);
    }
    path
}

/// Convenience wrapper building a one-off [`Generator`].
pub fn generate(scenario: &ScenarioConfig, rep: u64) -> Result<Dataset> {
    Generator::new(scenario)?.generate(rep)
}
