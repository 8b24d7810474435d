//! `fit`, `simulate` and `check`.

use std::fs;
use std::path::{Path, PathBuf};

use argmin_lab_core::asymptotics::{
    cox_conditions, exp_hazard_condition, logistic_condition, poisson_condition, sandwich_with,
    LindebergOptions, Variability,
};
use argmin_lab_core::estimators::{fit, Baseline, Dataset, Model, Response};
use argmin_lab_core::simulation::{
    bayes_equivalence_check, property_sweeps, quantile_process_check, BayesConfig, DesignSpec,
    QuantileProcessConfig, ScenarioConfig, SweepConfig,
};
use argmin_lab_core::Vector;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::data::{dataset_for, read_table, Schema};
use crate::engine::run_scenario_parallel;
use crate::error::CliError;
use crate::output::{render, write_atomic, Format};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Fit,
    Simulate,
    Check,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Simulate => "simulate",
            Command::Check => "check",
        }
    }
}

/// Fields shared by every experiment file.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct Envelope {
    pub command: Option<Command>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FitConfig {
    #[serde(flatten)]
    pub model: Model,
    pub input: PathBuf,
    /// Prepend a column of ones to the covariates.
    #[serde(default)]
    pub intercept: bool,
    pub states: Option<usize>,
    pub variability: Option<Variability>,
    /// Exponential-hazard follow-up limit.
    pub horizon: Option<f64>,
    #[serde(default)]
    pub lindeberg: LindebergOptions,
    /// Cox diagnostic times; defaults to the quartiles of the observed times.
    pub risk_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SimulateConfig {
    pub scenario: Option<ScenarioConfig>,
    pub quantile_process: Option<QuantileProcessConfig>,
    pub bayes_equivalence: Option<BayesConfig>,
}

/// A command line after argument parsing.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct Completed {
    pub exit_code: u8,
    pub document: Value,
    pub written: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

fn parse<T: DeserializeOwned>(value: &Value, what: &str) -> Result<T, CliError> {
    T::deserialize(value).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses the config, runs the command and writes the report.
///
/// Reports are written even when the command ends with a property
/// violation, so counterexamples can be inspected.
pub fn run(inv: &Invocation) -> Result<Completed, CliError> {
    let text = fs::read_to_string(&inv.config)
        .map_err(|e| CliError::Input(format!("{}: {e}", inv.config.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("malformed config: {e}")))?;
    if !value.is_object() {
        return Err(CliError::Input("config must be a JSON object".into()));
    }
    let envelope: Envelope = parse(&value, "config")?;
    if let Some(c) = envelope.command {
        if c != inv.command {
            return Err(CliError::Input(format!(
                "config is for \"{}\" but \"{}\" was requested",
                c.name(),
                inv.command.name()
            )));
        }
    }
    let base = inv
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let seed = inv.seed.or(envelope.seed);

    let (document, violations) = match inv.command {
        Command::Fit => (cmd_fit(&value, &base, seed)?, 0),
        Command::Simulate => (cmd_simulate(&value, &base, seed)?, 0),
        Command::Check => cmd_check(&value, seed)?,
    };
    let bytes = render(document.clone(), envelope.format)?;
    let written = inv
        .output
        .clone()
        .or_else(|| envelope.output.as_ref().map(|p| resolve(&base, p)));
    if let Some(path) = &written {
        if path.as_os_str().is_empty() {
            return Err(CliError::Input("output path is empty".into()));
        }
        write_atomic(path, &bytes)?;
    }
    let exit_code = if violations > 0 {
        CliError::Violations(violations).exit_code()
    } else {
        0
    };
    Ok(Completed {
        exit_code,
        document,
        written,
        bytes,
    })
}

fn default_risk_times(data: &Dataset) -> Vec<f64> {
    let mut t: Vec<f64> = match data.response() {
        Response::Survival(r) => r.iter().map(|r| r.time).collect(),
        _ => return Vec::new(),
    };
    t.sort_by(f64::total_cmp);
    [0.25, 0.5, 0.75]
        .iter()
        .map(|q| t[((t.len() - 1) as f64 * q).floor() as usize])
        .collect()
}

fn diagnostics(cfg: &FitConfig, data: &Dataset, beta: &Vector) -> Value {
    let x = data.covariates();
    let out = match cfg.model {
        Model::Logistic => {
            logistic_condition(x, beta, &cfg.lindeberg).map(|r| report::lindeberg(&r))
        }
        Model::Poisson => poisson_condition(x, beta, &cfg.lindeberg).map(|r| report::lindeberg(&r)),
        Model::ExpHazard { rate } => exp_hazard_condition(
            data,
            &Baseline::Constant(rate),
            cfg.horizon,
            beta,
            &cfg.lindeberg,
        )
        .map(|r| report::lindeberg(&r)),
        Model::Cox => {
            let grid = cfg
                .risk_times
                .clone()
                .unwrap_or_else(|| default_risk_times(data));
            cox_conditions(data, beta, &grid).map(|c| report::cox(&c))
        }
        _ => return Value::Null,
    };
    out.unwrap_or_else(|e| report::error(&e))
}

fn cmd_fit(value: &Value, base: &Path, seed: Option<u64>) -> Result<Value, CliError> {
    let cfg: FitConfig = parse(value, "fit config")?;
    if cfg.input.as_os_str().is_empty() {
        return Err(CliError::Input("input path is empty".into()));
    }
    if cfg.horizon.is_some() && !matches!(cfg.model, Model::ExpHazard { .. }) {
        return Err(CliError::Input("horizon applies to exp_hazard only".into()));
    }
    let input = resolve(base, &cfg.input);
    let table = read_table(&input)?;
    let data = dataset_for(
        &cfg.model,
        table,
        Schema {
            intercept: cfg.intercept,
            states: cfg.states,
        },
    )?;

    let result = match (cfg.model, cfg.horizon) {
        (Model::ExpHazard { rate }, Some(h)) => {
            argmin_lab_core::estimators::fit_exp_hazard(&data, &Baseline::Constant(rate), Some(h))?
        }
        (model, _) => fit(&model, &data)?,
    };
    let variability = cfg
        .variability
        .unwrap_or_else(|| Variability::default_for(&cfg.model));
    let covariance = sandwich_with(&cfg.model, &data, &result.beta_hat, variability)
        .map(|s| report::sandwich(&s))
        .unwrap_or_else(|e| report::error(&e));
    let model = serde_json::to_value(cfg.model).expect("model serialises");
    Ok(json!({
        "command": "fit",
        "seed": seed,
        "model": model,
        "input": cfg.input.display().to_string(),
        "n": data.len(),
        "p": result.beta_hat.len(),
        "fit": report::fit(&result),
        "sandwich": covariance,
        "diagnostics": diagnostics(&cfg, &data, &result.beta_hat),
    }))
}

fn load_fixed_design(scenario: &mut ScenarioConfig, base: &Path) -> Result<(), CliError> {
    if let DesignSpec::Fixed {
        rows,
        path: Some(p),
    } = &mut scenario.design
    {
        if rows.is_empty() {
            *rows = read_table(&resolve(base, Path::new(p)))?.row_vectors();
        }
    }
    Ok(())
}

fn cmd_simulate(value: &Value, base: &Path, seed: Option<u64>) -> Result<Value, CliError> {
    let cfg: SimulateConfig = parse(value, "simulate config")?;
    let chosen = usize::from(cfg.scenario.is_some())
        + usize::from(cfg.quantile_process.is_some())
        + usize::from(cfg.bayes_equivalence.is_some());
    if chosen != 1 {
        return Err(CliError::Input(
            "simulate needs exactly one of \"scenario\", \"quantile_process\", \"bayes_equivalence\"".into(),
        ));
    }
    let (seed, body) = if let Some(mut s) = cfg.scenario {
        s.seed = seed.unwrap_or(s.seed);
        load_fixed_design(&mut s, base)?;
        (s.seed, report::simulation(&run_scenario_parallel(&s)?))
    } else if let Some(mut q) = cfg.quantile_process {
        q.seed = seed.unwrap_or(q.seed);
        (
            q.seed,
            report::quantile_process(&quantile_process_check(&q)?),
        )
    } else {
        let mut b = cfg.bayes_equivalence.expect("one job chosen");
        b.seed = seed.unwrap_or(b.seed);
        (b.seed, report::bayes(&bayes_equivalence_check(&b)?))
    };
    Ok(headed("simulate", seed, body))
}

/// Puts `command` and `seed` ahead of the report fields.
fn headed(command: &str, seed: u64, body: Value) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), command.into());
    doc.insert("seed".into(), seed.into());
    if let Value::Object(o) = body {
        doc.extend(o);
    }
    Value::Object(doc)
}

fn cmd_check(value: &Value, seed: Option<u64>) -> Result<(Value, usize), CliError> {
    let mut cfg: SweepConfig = parse(value, "check config")?;
    cfg.seed = seed.unwrap_or(cfg.seed);
    let summary = property_sweeps(&cfg)?;
    let mut body = serde_json::json!({ "draws": cfg.draws, "bound_scale": crate::output::num(cfg.bound_scale) });
    if let (Value::Object(o), Value::Object(r)) = (&mut body, report::sweeps(&summary)) {
        o.extend(r);
    }
    Ok((headed("check", cfg.seed, body), summary.violations()))
}
