use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRecord {
    pub time: f64,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Continuous(Vec<f64>),
    /// Values in `{0, 1}` stored as floats.
    Binary(Vec<f64>),
    Count(Vec<u64>),
    /// Covariate rows live in the dataset's design matrix.
    Survival(Vec<SurvivalRecord>),
    /// States `x_0..x_n` in `1..=states`.
    Markov {
        path: Vec<usize>,
        states: usize,
    },
}

/// Covariates plus exactly one kind of response. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    covariates: Matrix,
    response: Response,
}

fn check_design(x: &Matrix, n: usize) -> Result<()> {
    if x.nrows() != n {
        return Err(Error::invalid(
            "covariate rows must match the response length",
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("covariates must be finite"));
    }
    Ok(())
}

impl Dataset {
    /// Continuous response without covariates (location problems).
    pub fn location(y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        Self::continuous(Matrix::zeros(n, 0), y)
    }

    pub fn continuous(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyData);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("response must be finite"));
        }
        check_design(&x, y.len())?;
        Ok(Dataset {
            covariates: x,
            response: Response::Continuous(y),
        })
    }

    pub fn binary(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyData);
        }
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::invalid("binary response must be 0 or 1"));
        }
        check_design(&x, y.len())?;
        Ok(Dataset {
            covariates: x,
            response: Response::Binary(y),
        })
    }

    pub fn count(x: Matrix, y: Vec<u64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyData);
        }
        check_design(&x, y.len())?;
        Ok(Dataset {
            covariates: x,
            response: Response::Count(y),
        })
    }

    pub fn survival(x: Matrix, records: Vec<SurvivalRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyData);
        }
        if records
            .iter()
            .any(|r| !(r.time > 0.0) || !r.time.is_finite())
        {
            return Err(Error::invalid(
                "survival times must be finite and strictly positive",
            ));
        }
        check_design(&x, records.len())?;
        Ok(Dataset {
            covariates: x,
            response: Response::Survival(records),
        })
    }

    pub fn markov(path: Vec<usize>, states: usize) -> Result<Self> {
        if path.is_empty() {
            return Err(Error::EmptyData);
        }
        if states < 2 {
            return Err(Error::invalid("a Markov path needs at least two states"));
        }
        if path.iter().any(|&s| s == 0 || s > states) {
            return Err(Error::invalid("Markov states must lie in 1..=k"));
        }
        let n = path.len();
        Ok(Dataset {
            covariates: Matrix::zeros(n, 0),
            response: Response::Markov { path, states },
        })
    }

    pub fn covariates(&self) -> &Matrix {
        &self.covariates
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn len(&self) -> usize {
        match &self.response {
            Response::Continuous(y) | Response::Binary(y) => y.len(),
            Response::Count(y) => y.len(),
            Response::Survival(r) => r.len(),
            Response::Markov { path, .. } => path.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn continuous_response(&self) -> Result<&[f64]> {
        match &self.response {
            Response::Continuous(y) => Ok(y),
            _ => Err(Error::invalid("model needs a continuous response")),
        }
    }

    pub fn binary_response(&self) -> Result<&[f64]> {
        match &self.response {
            Response::Binary(y) => Ok(y),
            _ => Err(Error::invalid("model needs a binary response")),
        }
    }

    pub fn count_response(&self) -> Result<&[u64]> {
        match &self.response {
            Response::Count(y) => Ok(y),
            _ => Err(Error::invalid("model needs a count response")),
        }
    }

    pub fn survival_response(&self) -> Result<&[SurvivalRecord]> {
        match &self.response {
            Response::Survival(r) => Ok(r),
            _ => Err(Error::invalid("model needs survival records")),
        }
    }

    pub fn markov_response(&self) -> Result<(&[usize], usize)> {
        match &self.response {
            Response::Markov { path, states } => Ok((path, *states)),
            _ => Err(Error::invalid("model needs a Markov path")),
        }
    }

    /// Same response with every covariate column multiplied by `c`.
    pub fn with_scaled_covariates(&self, c: f64) -> Self {
        Dataset {
            covariates: &self.covariates * c,
            response: self.response.clone(),
        }
    }
}
