//! Delimited-text ingestion.
//!
//! A header row is required. The response lives in `y`, survival data in
//! `time` and `event`, and every other column is a covariate in header
//! order.

use std::path::Path;

use argmin_lab_core::estimators::{Dataset, Model, SurvivalRecord};
use argmin_lab_core::Matrix;

use crate::error::CliError;

/// Columns of a parsed table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    fn take(&mut self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        self.headers.remove(i);
        Some(self.columns.remove(i))
    }

    fn require(&mut self, name: &str) -> Result<Vec<f64>, CliError> {
        self.take(name)
            .ok_or_else(|| CliError::Input(format!("missing column \"{name}\"")))
    }

    fn design(&self, intercept: bool) -> Matrix {
        let n = self.rows();
        let offset = usize::from(intercept);
        Matrix::from_fn(n, self.columns.len() + offset, |i, j| {
            if j < offset {
                1.0
            } else {
                self.columns[j - offset][i]
            }
        })
    }

    /// Row-major copy, for fixed simulation designs.
    pub fn row_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| self.columns.iter().map(|c| c[i]).collect())
            .collect()
    }
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().any(String::is_empty) {
        return Err(CliError::Input(format!(
            "{}: header row has empty names",
            path.display()
        )));
    }
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(CliError::Input(format!(
                "{}: duplicate column \"{h}\"",
                path.display()
            )));
        }
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Input(format!(
                    "{}: row {}, column \"{}\": not a number",
                    path.display(),
                    line + 2,
                    headers[j]
                ))
            })?;
            columns[j].push(v);
        }
    }
    Ok(Table { headers, columns })
}

/// Options that shape how a table becomes a dataset.
#[derive(Debug, Clone, Copy, Default)]
pub struct Schema {
    pub intercept: bool,
    /// Markov state count; defaults to the largest observed state.
    pub states: Option<usize>,
}

pub fn dataset_for(model: &Model, mut table: Table, schema: Schema) -> Result<Dataset, CliError> {
    let data = match model {
        Model::Cox | Model::ExpHazard { .. } => {
            let time = table.require("time")?;
            let event = table.require("event")?;
            let records = time
                .iter()
                .zip(&event)
                .map(|(&time, &e)| match e {
                    0.0 => Ok(SurvivalRecord { time, event: false }),
                    1.0 => Ok(SurvivalRecord { time, event: true }),
                    _ => Err(CliError::Input("event column must hold 0 or 1".into())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Dataset::survival(table.design(schema.intercept), records)
        }
        Model::Quantile { .. }
        | Model::LAlpha { .. }
        | Model::DoubleExponential
        | Model::MarkovPl => {
            let y = table.require("y")?;
            if !table.headers.is_empty() {
                return Err(CliError::Input(format!(
                    "{} takes no covariates",
                    model.name()
                )));
            }
            if let Model::MarkovPl = model {
                let path = y
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(CliError::Input(
                                "Markov states must be positive integers".into(),
                            ))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let states = schema
                    .states
                    .unwrap_or_else(|| path.iter().copied().max().unwrap_or(2).max(2));
                Dataset::markov(path, states)
            } else {
                Dataset::location(y)
            }
        }
        Model::Ols | Model::Lad => {
            let y = table.require("y")?;
            Dataset::continuous(table.design(schema.intercept), y)
        }
        Model::Logistic => {
            let y = table.require("y")?;
            Dataset::binary(table.design(schema.intercept), y)
        }
        Model::Poisson => {
            let y = table.require("y")?;
            let counts = y
                .iter()
                .map(|&v| {
                    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
                        Ok(v as u64)
                    } else {
                        Err(CliError::Input(
                            "counts must be non-negative integers".into(),
                        ))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Dataset::count(table.design(schema.intercept), counts)
        }
    };
    data.map_err(CliError::from_core_input)
}
