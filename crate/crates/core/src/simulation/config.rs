use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::distributions::ErrorLaw;
use crate::error::{Error, Result};
use crate::estimators::Model;

/// Covariate distribution `H`, or a fixed design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSpec {
    /// Location problems: no covariates.
    #[default]
    None,
    /// Independent standard normal columns.
    Gaussian {
        p: usize,
        #[serde(default)]
        intercept: bool,
        /// Draw once from the base seed and reuse in every replication.
        #[serde(default)]
        fixed: bool,
    },
    Uniform {
        p: usize,
        low: f64,
        high: f64,
        #[serde(default)]
        intercept: bool,
        #[serde(default)]
        fixed: bool,
    },
    /// Finite support with probabilities proportional to `weights`.
    Discrete {
        support: Vec<Vec<f64>>,
        weights: Vec<f64>,
        #[serde(default)]
        fixed: bool,
    },
    /// Explicit rows, recycled in order to reach `n`. `path` is resolved by
    /// the front end, which fills `rows`.
    Fixed {
        #[serde(default)]
        rows: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
}

impl DesignSpec {
    /// Number of covariate columns.
    pub fn columns(&self) -> usize {
        match self {
            DesignSpec::None => 0,
            DesignSpec::Gaussian { p, intercept, .. }
            | DesignSpec::Uniform { p, intercept, .. } => p + usize::from(*intercept),
            DesignSpec::Discrete { support, .. } => support.first().map_or(0, Vec::len),
            DesignSpec::Fixed { rows, .. } => rows.first().map_or(0, Vec::len),
        }
    }

    /// Whether every replication shares one design.
    pub fn is_fixed(&self) -> bool {
        match self {
            DesignSpec::None | DesignSpec::Fixed { .. } => true,
            DesignSpec::Gaussian { fixed, .. }
            | DesignSpec::Uniform { fixed, .. }
            | DesignSpec::Discrete { fixed, .. } => *fixed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::UnknownMenuItem(String::from(m)));
        match self {
            DesignSpec::None => Ok(()),
            DesignSpec::Gaussian { p, intercept, .. } => {
                if *p == 0 && !intercept {
                    return bad("gaussian design with no columns");
                }
                Ok(())
            }
            DesignSpec::Uniform {
                p,
                low,
                high,
                intercept,
                ..
            } => {
                if *p == 0 && !intercept {
                    return bad("uniform design with no columns");
                }
                if !(low < high) || !low.is_finite() || !high.is_finite() {
                    return bad("uniform design needs finite low < high");
                }
                Ok(())
            }
            DesignSpec::Discrete {
                support, weights, ..
            } => {
                let p = self.columns();
                if support.is_empty() || p == 0 || support.iter().any(|r| r.len() != p) {
                    return bad("discrete design needs non-empty rows of equal length");
                }
                if weights.len() != support.len()
                    || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite())
                    || !(weights.iter().sum::<f64>() > 0.0)
                {
                    return bad("discrete design weights must be nonnegative, one per support row");
                }
                if support.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("discrete design support must be finite");
                }
                Ok(())
            }
            DesignSpec::Fixed { rows, path } => {
                if rows.is_empty() {
                    return if path.is_some() {
                        Err(Error::invalid("fixed design path was not loaded"))
                    } else {
                        bad("fixed design without rows")
                    };
                }
                let p = rows[0].len();
                if p == 0
                    || rows.iter().any(|r| r.len() != p)
                    || rows.iter().flatten().any(|v| !v.is_finite())
                {
                    return bad("fixed design rows must be finite and of equal length");
                }
                Ok(())
            }
        }
    }
}

/// Polynomial in the last covariate column, `Σ c_k x^k`.
fn poly(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Regression function `m(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeanFunction {
    /// `β₀'x` (the working model).
    #[default]
    Linear,
    /// `Σ c_k x^k` in the last covariate.
    Polynomial { coefficients: Vec<f64> },
}

impl MeanFunction {
    pub fn eval(&self, row: &[f64], theta0: &[f64]) -> f64 {
        match self {
            MeanFunction::Linear => row.iter().zip(theta0).map(|(x, b)| x * b).sum(),
            MeanFunction::Polynomial { coefficients } => {
                poly(coefficients, row.last().copied().unwrap_or(0.0))
            }
        }
    }
}

/// Error scale `σ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleFunction {
    Constant {
        sigma: f64,
    },
    /// `Σ c_k x^k` in the last covariate; must stay nonnegative.
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl Default for ScaleFunction {
    fn default() -> Self {
        ScaleFunction::Constant { sigma: 1.0 }
    }
}

impl ScaleFunction {
    pub fn eval(&self, row: &[f64]) -> Result<f64> {
        let s = match self {
            ScaleFunction::Constant { sigma } => *sigma,
            ScaleFunction::Polynomial { coefficients } => {
                poly(coefficients, row.last().copied().unwrap_or(0.0))
            }
        };
        if s >= 0.0 && s.is_finite() {
            Ok(s)
        } else {
            Err(Error::invalid(format!(
                "scale function is negative or non-finite: {s}"
            )))
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScaleFunction::Constant { .. })
    }
}

/// Success probability `q(x)` for binary responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Link {
    /// `exp(β₀'x) / (1 + exp(β₀'x))` (the working model).
    #[default]
    Logistic,
    /// `Φ(β₀'x)`.
    Probit,
    /// `1 − exp(−exp(β₀'x))`.
    Cloglog,
    /// One probability per support row of a discrete design.
    Table { values: Vec<f64> },
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub model: Model,
    pub n: usize,
    pub replications: usize,
    /// True parameter: `β₀` for regressions, the location for location
    /// models, the coupling for Markov chains.
    #[serde(default)]
    pub theta0: Vec<f64>,
    #[serde(default)]
    pub design: DesignSpec,
    #[serde(default)]
    pub mean: MeanFunction,
    #[serde(default)]
    pub scale: ScaleFunction,
    #[serde(default)]
    pub link: Link,
    #[serde(default = "normal_law")]
    pub error: ErrorLaw,
    #[serde(default)]
    pub seed: u64,
    /// Target censoring fraction (survival models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub censoring: Option<f64>,
    /// Number of Markov states.
    #[serde(default = "two_states")]
    pub states: usize,
}

fn normal_law() -> ErrorLaw {
    ErrorLaw::Normal
}

fn two_states() -> usize {
    2
}

pub const MIN_REPLICATIONS: usize = 100;
pub const MAX_MARKOV_STATES: usize = 8;

impl ScenarioConfig {
    /// Dimension of the estimated parameter.
    pub fn parameter_dim(&self) -> usize {
        match self.model {
            Model::Quantile { .. } | Model::LAlpha { .. } | Model::MarkovPl => 1,
            Model::DoubleExponential => 2,
            _ => self.design.columns(),
        }
    }

    /// Whether the working model is misspecified, so the target is a
    /// projection parameter.
    pub fn is_misspecified(&self) -> bool {
        match self.model {
            Model::Ols | Model::Lad => !matches!(self.mean, MeanFunction::Linear),
            Model::Logistic => !matches!(self.link, Link::Logistic),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let menu = |m: String| Err(Error::UnknownMenuItem(m));
        self.design.validate()?;
        self.error.validate()?;
        let p = self.parameter_dim();
        if p == 0 {
            return menu(format!("model {} needs covariates", self.model.name()));
        }
        if self.n < 4 * p {
            return Err(Error::invalid(format!(
                "n = {} is below 4p = {}",
                self.n,
                4 * p
            )));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::invalid(format!(
                "replications = {} is below {MIN_REPLICATIONS}",
                self.replications
            )));
        }
        let location = matches!(
            self.model,
            Model::Quantile { .. } | Model::LAlpha { .. } | Model::DoubleExponential
        );
        let needs_design = !location && self.model != Model::MarkovPl;
        if needs_design == matches!(self.design, DesignSpec::None) {
            return menu(format!(
                "design {:?} does not suit model {}",
                self.design,
                self.model.name()
            ));
        }
        let theta_len = match self.model {
            Model::Quantile { .. }
            | Model::LAlpha { .. }
            | Model::DoubleExponential
            | Model::MarkovPl => 1,
            _ => p,
        };
        let theta_optional = self.is_misspecified() && self.model != Model::Lad;
        if !(self.theta0.len() == theta_len || (theta_optional && self.theta0.is_empty())) {
            return Err(Error::invalid(format!(
                "theta0 must have {theta_len} entries"
            )));
        }
        if self.theta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("theta0 must be finite"));
        }
        if let Link::Table { values } = &self.link {
            match &self.design {
                DesignSpec::Discrete { support, .. } if support.len() == values.len() => {}
                _ => {
                    return menu(String::from(
                        "table link needs a discrete design with one value per support row",
                    ))
                }
            }
            if values.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(Error::invalid("table probabilities must lie in [0, 1]"));
            }
        }
        if !matches!(self.link, Link::Logistic) && self.model != Model::Logistic {
            return menu(String::from(
                "link functions apply to the logistic model only",
            ));
        }
        if !matches!(self.mean, MeanFunction::Linear)
            && !matches!(self.model, Model::Ols | Model::Lad)
        {
            return menu(String::from("mean functions apply to OLS and LAD only"));
        }
        if let Some(c) = self.censoring {
            if !matches!(self.model, Model::Cox | Model::ExpHazard { .. }) {
                return menu(String::from("censoring applies to survival models only"));
            }
            if !(0.0..1.0).contains(&c) {
                return Err(Error::invalid("censoring fraction must lie in [0, 1)"));
            }
        }
        if self.model == Model::MarkovPl && !(2..=MAX_MARKOV_STATES).contains(&self.states) {
            return menu(format!(
                "Markov state count {} outside 2..={MAX_MARKOV_STATES}",
                self.states
            ));
        }
        match self.model {
            Model::Quantile { p } if !(p > 0.0 && p < 1.0) => menu(format!("quantile level {p}")),
            Model::LAlpha { alpha } if !(alpha >= 1.0) || !alpha.is_finite() => {
                menu(format!("alpha = {alpha}"))
            }
            Model::ExpHazard { rate } if !(rate > 0.0) || !rate.is_finite() => {
                menu(format!("baseline rate {rate}"))
            }
            _ => Ok(()),
        }
    }
}
