//! Sandwich covariances and the regularity diagnostics behind the normal
//! limits: the log-sum-exp expansion, Lindeberg-type conditions for the
//! Bernoulli, logistic, Poisson and hazard models, and Cox risk-set
//! trajectories.

mod cox;
mod expansion;
mod lindeberg;
mod sandwich;

pub use cox::{cox_conditions, CoxConditions};
pub use expansion::{expansion_g, logsumexp_expand, ExpansionReport, LogSumExp};
pub use lindeberg::{
    bernoulli_lindeberg, exp_hazard_condition, logistic_condition, poisson_condition, poisson_rho,
    single_delta, LindebergOptions, LindebergReport, DEFAULT_DELTA_GRID,
};
pub use sandwich::{
    kernel_density, sandwich_for, sandwich_with, silverman_bandwidth, SandwichCovariance,
    Variability,
};
