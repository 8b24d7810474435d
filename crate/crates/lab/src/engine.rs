//! Parallel replication driver.
//!
//! Replications are generated and fitted on the rayon pool. `collect`
//! keeps index order, so the aggregated report is identical for any
//! number of worker threads.

use argmin_lab_core::simulation::{PreparedScenario, ScenarioConfig, SimulationReport};
use argmin_lab_core::Result;
use rayon::prelude::*;

pub fn run_scenario_parallel(scenario: &ScenarioConfig) -> Result<SimulationReport> {
    let prepared = PreparedScenario::new(scenario)?;
    run_prepared(&prepared)
}

pub fn run_prepared(prepared: &PreparedScenario) -> Result<SimulationReport> {
    let outcomes = (0..prepared.scenario().replications as u64)
        .into_par_iter()
        .map(|rep| prepared.replicate(rep))
        .collect();
    prepared.aggregate(outcomes)
}
