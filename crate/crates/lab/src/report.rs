//! JSON views of core reports.

use argmin_lab_core::asymptotics::{CoxConditions, LindebergReport, SandwichCovariance};
use argmin_lab_core::estimators::FitResult;
use argmin_lab_core::simulation::{
    BayesReport, Counterexample, QuantileProcessReport, SimulationReport, SweepSummary,
};
use argmin_lab_core::{Error, Matrix, Vector};
use serde_json::{json, Map, Value};

use crate::output::num;

pub fn vector(v: &Vector) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Row-major nested arrays.
pub fn matrix(m: &Matrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array(m.row(i).iter().map(|&x| num(x)).collect()))
            .collect(),
    )
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn error(e: &Error) -> Value {
    json!({ "error": e.kind(), "message": e.to_string() })
}

pub fn fit(result: &FitResult) -> Value {
    let s = &result.solve;
    json!({
        "beta_hat": vector(&result.beta_hat),
        "objective_value": num(s.value),
        "certificate_norm": num(s.certificate_norm),
        "iterations": s.iterations,
        "converged": s.converged,
    })
}

pub fn sandwich(s: &SandwichCovariance) -> Value {
    let mut o = Map::new();
    o.insert(
        "variability".into(),
        serde_json::to_value(s.variability).expect("unit enum"),
    );
    o.insert("method".into(), s.method.into());
    o.insert("bandwidth".into(), opt(s.bandwidth));
    o.insert("j".into(), matrix(&s.j));
    o.insert("k".into(), matrix(&s.k));
    o.insert("l".into(), matrix(&s.l));
    match s.assembled() {
        Ok(c) => {
            let se: Vec<f64> = c.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect();
            o.insert("covariance".into(), matrix(&c));
            o.insert("standard_errors".into(), floats(&se));
        }
        Err(e) => {
            o.insert("covariance".into(), error(&e));
        }
    }
    Value::Object(o)
}

pub fn lindeberg(r: &LindebergReport) -> Value {
    json!({
        "delta_grid": floats(&r.delta_grid),
        "n_values": floats(&r.n_values),
        "lindeberg_values": r.lindeberg_values.as_deref().map(floats),
        "n_double_delta": r.n_double_delta.as_deref().map(floats),
        "lambda": num(r.lambda),
        "p": r.p,
        "mu": opt(r.mu),
        "scale": opt(r.scale),
        "rho_sum": opt(r.rho_sum),
        "delta": num(r.delta),
        "n_at_delta": num(r.n_at_delta),
        "threshold": num(r.threshold),
        "passes": r.passes,
        "invariants_hold": r.invariants_hold(),
    })
}

pub fn cox(c: &CoxConditions) -> Value {
    json!({
        "s_grid": floats(&c.s_grid),
        "j": c.j.iter().map(matrix).collect::<Vec<_>>(),
        "mu": floats(&c.mu),
        "max_mu": num(c.max_mu),
    })
}

pub fn simulation(r: &SimulationReport) -> Value {
    json!({
        "kind": "scenario",
        "model": r.model.name(),
        "n": r.n,
        "replications": r.replications,
        "successes": r.successes,
        "theta0": vector(&r.theta0),
        "statistic": r.statistic.name(),
        "mean": vector(&r.mean),
        "empirical_covariance": matrix(&r.empirical_covariance),
        "theoretical_covariance": matrix(&r.theoretical_covariance),
        "provenance": r.provenance,
        "information_inverse": r.information_inverse.as_ref().map(matrix),
        "frobenius_relative": num(r.frobenius_relative),
        "max_relative_eigen": num(r.max_relative_eigen),
        "ks": floats(&r.ks),
        "coverage": floats(&r.coverage),
        "coverage_count": r.coverage_count,
        "median_error_norm": num(r.median_error_norm),
        "failures": r.failures,
    })
}

pub fn quantile_process(r: &QuantileProcessReport) -> Value {
    json!({
        "kind": "quantile_process",
        "levels": floats(&r.levels),
        "n": r.n,
        "replications": r.replications,
        "empirical_covariance": matrix(&r.empirical),
        "theoretical_covariance": matrix(&r.theory),
        "max_relative_entry": num(r.max_relative_entry),
        "frobenius_relative": num(r.frobenius_relative),
    })
}

pub fn bayes(r: &BayesReport) -> Value {
    json!({
        "kind": "bayes_equivalence",
        "n_grid": r.n_grid,
        "replications": r.replications,
        "medians": floats(&r.medians),
        "ratios": floats(&r.ratios),
        "strictly_decreasing": r.strictly_decreasing,
    })
}

fn counterexample(c: &Counterexample) -> Value {
    let mut o = Map::new();
    o.insert("draw".into(), c.draw.into());
    for (name, values) in &c.fields {
        o.insert(name.clone(), floats(values));
    }
    Value::Object(o)
}

pub fn sweeps(s: &SweepSummary) -> Value {
    json!({
        "passed": s.passed(),
        "violations": s.violations(),
        "sweeps": s.sweeps.iter().map(|r| json!({
            "name": r.name,
            "draws": r.draws,
            "violations": r.violations,
            "passed": r.violations == 0,
            "counterexamples": r.counterexamples.iter().map(counterexample).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}
