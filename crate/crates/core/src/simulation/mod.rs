//! Monte Carlo harness: scenario configuration, data generation, the
//! limiting law each statistic should follow, and replication aggregation.

mod checks;
mod config;
mod engine;
mod generate;
mod theory;

pub use checks::{
    basic_corollary_check, bayes_equivalence_check, property_sweeps, quantile_process_check,
    BayesConfig, BayesReport, CorollaryConfig, CorollaryInstance, CorollaryReport, Counterexample,
    Perturbation, PriorSpec, QuantileProcessConfig, QuantileProcessReport, SweepConfig,
    SweepReport, SweepSummary, MAX_COUNTEREXAMPLES,
};
pub use config::{
    DesignSpec, Link, MeanFunction, ScaleFunction, ScenarioConfig, MAX_MARKOV_STATES,
    MIN_REPLICATIONS,
};
pub use engine::{
    ks_fitted_normal, run_scenario, PreparedScenario, ReplicationStats, SimulationReport,
    MAX_FAILURE_FRACTION,
};
pub use generate::{
    calibrate_censoring, generate, markov_path, population, replication_seed, Generator,
    Population, POPULATION_SAMPLE,
};
pub use theory::{
    l_alpha_variance, population_projection, population_sandwich, quantile_process_covariance,
    quantile_variance, theory, PopulationSandwich, StatisticKind, Theory,
};
