use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::config::ScenarioConfig;
use super::generate::Generator;
use super::theory::{theory, StatisticKind, Theory};
use crate::asymptotics::{sandwich_for, sandwich_with, Variability};
use crate::error::{Error, Result};
use crate::estimators::{fit, Dataset, Model};
use crate::linalg::{
    frobenius_relative, inverse_spd, max_relative_eigen_discrepancy, sqrt_spd, symmetrize, Matrix,
    Vector,
};
use crate::special::normal_cdf;

/// Largest tolerated share of failed replications.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;
const WALD_Z: f64 = 1.959_963_984_540_054;

/// What one successful replication contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub estimate: Vector,
    pub statistic: Vector,
    /// `J_n(θ̂)/n` and `(K_n + L_n)(θ̂)/n` for average-information
    /// scenarios.
    pub information: Option<(Matrix, Matrix)>,
    /// Sandwich standard errors at `θ̂`, when assembly succeeded.
    pub standard_errors: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub model: Model,
    pub n: usize,
    pub replications: usize,
    pub successes: usize,
    pub theta0: Vector,
    pub statistic: StatisticKind,
    pub mean: Vector,
    pub empirical_covariance: Matrix,
    pub theoretical_covariance: Matrix,
    pub provenance: &'static str,
    /// Inverse of the averaged `J_n/n` (average-information scenarios).
    /// Differs from the theoretical covariance when `K ≠ J`.
    pub information_inverse: Option<Matrix>,
    pub frobenius_relative: f64,
    pub max_relative_eigen: f64,
    /// Kolmogorov–Smirnov distance to the normal law with the empirical
    /// mean and variance, per coordinate.
    pub ks: Vec<f64>,
    /// Share of 95% Wald intervals covering `θ₀`, per coordinate.
    pub coverage: Vec<f64>,
    pub coverage_count: usize,
    /// Median of `|θ̂ − θ₀|` over replications.
    pub median_error_norm: f64,
    /// Failed replications by error kind.
    pub failures: BTreeMap<&'static str, usize>,
}

/// A scenario with its generator and limit law, ready to replicate.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    generator: Generator,
    theory: Theory,
}

impl PreparedScenario {
    pub fn new(scenario: &ScenarioConfig) -> Result<Self> {
        let generator = Generator::new(scenario)?;
        let theory = theory(scenario)?;
        Ok(PreparedScenario { generator, theory })
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        self.generator.scenario()
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn generate(&self, rep: u64) -> Result<Dataset> {
        self.generator.generate(rep)
    }

    /// Generates and fits replication `rep`. Pure in `(scenario, rep)`.
    pub fn replicate(&self, rep: u64) -> Result<ReplicationStats> {
        let data = self.generator.generate(rep)?;
        self.evaluate(&data)
    }

    fn evaluate(&self, data: &Dataset) -> Result<ReplicationStats> {
        let model = self.scenario().model;
        let estimate = fit(&model, data)?.beta_hat;
        let theta0 = &self.theory.theta0;
        let diff = &estimate - theta0;
        let n = data.len() as f64;
        let (statistic, information) = match self.theory.kind {
            StatisticKind::Scaled => (diff * n.sqrt(), None),
            StatisticKind::Standardized => {
                let j = sandwich_with(&model, data, theta0, Variability::Model)?.j;
                (sqrt_spd(&j)? * diff, None)
            }
            StatisticKind::AverageInformation => {
                let sw = sandwich_for(&model, data, &estimate)?;
                (diff * n.sqrt(), Some((sw.j / n, (sw.k + sw.l) / n)))
            }
        };
        let standard_errors = sandwich_for(&model, data, &estimate)
            .and_then(|s| s.assembled())
            .ok()
            .map(|c| c.diagonal().map(|v| v.max(0.0).sqrt()));
        Ok(ReplicationStats {
            estimate,
            statistic,
            information,
            standard_errors,
        })
    }

    /// Combines outcomes listed in replication order. Estimation failures
    /// are counted and excluded; any other error aborts.
    pub fn aggregate(&self, outcomes: Vec<Result<ReplicationStats>>) -> Result<SimulationReport> {
        let s = self.scenario();
        let total = outcomes.len();
        let mut failures: BTreeMap<&'static str, usize> = BTreeMap::new();
        let mut ok = Vec::with_capacity(total);
        for outcome in outcomes {
            match outcome {
                Ok(stats) => ok.push(stats),
                Err(e) if e.is_estimation_failure() => *failures.entry(e.kind()).or_default() += 1,
                Err(e) => return Err(e),
            }
        }
        let failed = total - ok.len();
        if failed as f64 > MAX_FAILURE_FRACTION * total as f64 || ok.len() < 2 {
            return Err(Error::TooManyFailures {
                failures: failed,
                replications: total,
            });
        }
        let p = self.theory.theta0.len();
        let r = ok.len() as f64;

        let mut mean = Vector::zeros(p);
        for st in &ok {
            mean += &st.statistic;
        }
        mean /= r;
        let mut cov = Matrix::zeros(p, p);
        for st in &ok {
            let d = &st.statistic - &mean;
            cov.ger(1.0 / (r - 1.0), &d, &d, 1.0);
        }
        let cov = symmetrize(&cov);

        let (theory_cov, information_inverse) = match &self.theory.covariance {
            Some(c) => (c.clone(), None),
            None => {
                let mut j = Matrix::zeros(p, p);
                let mut k = Matrix::zeros(p, p);
                for st in &ok {
                    let (ji, ki) = st.information.as_ref().expect("information recorded");
                    j += ji;
                    k += ki;
                }
                let j_inv = inverse_spd(&symmetrize(&(j / r)))?;
                (symmetrize(&(&j_inv * (k / r) * &j_inv)), Some(j_inv))
            }
        };

        let ks = (0..p)
            .map(|j| ks_fitted_normal(ok.iter().map(|st| st.statistic[j]).collect()))
            .collect();

        let mut covered = alloc::vec![0usize; p];
        let mut coverage_count = 0;
        for st in &ok {
            if let Some(se) = &st.standard_errors {
                coverage_count += 1;
                for j in 0..p {
                    if (st.estimate[j] - self.theory.theta0[j]).abs() <= WALD_Z * se[j] {
                        covered[j] += 1;
                    }
                }
            }
        }
        let coverage = covered
            .iter()
            .map(|&c| c as f64 / coverage_count.max(1) as f64)
            .collect();

        let mut errors: Vec<f64> = ok
            .iter()
            .map(|st| (&st.estimate - &self.theory.theta0).norm())
            .collect();
        errors.sort_by(f64::total_cmp);
        let median_error_norm = median_sorted(&errors);

        Ok(SimulationReport {
            model: s.model,
            n: s.n,
            replications: total,
            successes: ok.len(),
            theta0: self.theory.theta0.clone(),
            statistic: self.theory.kind,
            mean,
            frobenius_relative: frobenius_relative(&cov, &theory_cov),
            max_relative_eigen: max_relative_eigen_discrepancy(&cov, &theory_cov)?,
            empirical_covariance: cov,
            theoretical_covariance: theory_cov,
            provenance: self.theory.provenance,
            information_inverse,
            ks,
            coverage,
            coverage_count,
            median_error_norm,
            failures,
        })
    }
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Kolmogorov–Smirnov distance between the sample and the normal law with
/// its own mean and standard deviation.
pub fn ks_fitted_normal(mut values: Vec<f64>) -> f64 {
    let m = values.len() as f64;
    if values.len() < 2 {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / m;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt();
    if !(sd > 0.0) {
        return 1.0;
    }
    values.iter().enumerate().fold(0.0, |d: f64, (i, v)| {
        let f = normal_cdf((v - mean) / sd);
        d.max(((i + 1) as f64 / m - f).max(f - i as f64 / m))
    })
}

/// Runs every replication in order on the calling thread.
pub fn run_scenario(scenario: &ScenarioConfig) -> Result<SimulationReport> {
    let prepared = PreparedScenario::new(scenario)?;
    let outcomes = (0..scenario.replications as u64)
        .map(|rep| prepared.replicate(rep))
        .collect();
    prepared.aggregate(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::ErrorLaw;
    use crate::simulation::config::{DesignSpec, Link, MeanFunction, ScaleFunction};
    use alloc::vec;

    fn scenario(
        model: Model,
        design: DesignSpec,
        theta0: Vec<f64>,
        n: usize,
        r: usize,
    ) -> ScenarioConfig {
        ScenarioConfig {
            model,
            n,
            replications: r,
            theta0,
            design,
            mean: MeanFunction::Linear,
            scale: ScaleFunction::Constant { sigma: 1.0 },
            link: Link::Logistic,
            error: ErrorLaw::Normal,
            seed: 42,
            censoring: None,
            states: 2,
        }
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        let v: Vec<f64> = (1..1000)
            .map(|i| crate::special::normal_quantile(i as f64 / 1000.0))
            .collect();
        assert!(ks_fitted_normal(v) < 0.01);
    }

    #[test]
    fn median_scenario_small_run() {
        let s = scenario(
            Model::Quantile { p: 0.5 },
            DesignSpec::None,
            vec![0.0],
            200,
            400,
        );
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.successes, 400);
        assert!((r.empirical_covariance[(0, 0)] / core::f64::consts::FRAC_PI_2 - 1.0).abs() < 0.2);
        assert!(r.coverage[0] > 0.85 && r.coverage[0] <= 1.0);
    }

    #[test]
    fn ols_orthonormal_coverage() {
        let s = scenario(
            Model::Ols,
            DesignSpec::Discrete {
                support: vec![vec![1.0, 1.0], vec![1.0, -1.0]],
                weights: vec![1.0, 1.0],
                fixed: true,
            },
            vec![1.0, 2.0],
            200,
            1000,
        );
        let r = run_scenario(&s).unwrap();
        for c in &r.coverage {
            assert!((0.93..=0.97).contains(c), "{c}");
        }
    }

    #[test]
    fn separation_failures_are_counted() {
        let s = scenario(
            Model::Logistic,
            DesignSpec::Discrete {
                support: vec![vec![1.0]],
                weights: vec![1.0],
                fixed: false,
            },
            vec![4.0],
            4,
            200,
        );
        // With q = 0.982 and n = 4, about 93% of samples are all ones.
        match run_scenario(&s) {
            Err(Error::TooManyFailures {
                failures,
                replications,
            }) => {
                assert_eq!(replications, 200);
                assert!(failures > 150);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
