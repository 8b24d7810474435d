use alloc::boxed::Box;
use alloc::string::String;

use crate::convex::SolveReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the library can surface.
///
/// Variant names double as the stable identifiers printed by the command-line
/// front end, see [`Error::kind`].
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("objective is not finite at the starting point")]
    NonFiniteObjective,
    #[error("objective keeps decreasing along a direction; no finite minimiser exists")]
    MonotoneObjective(Box<SolveReport>),
    #[error(
        "smoothing homotopy finished but the subgradient certificate fails (residual {residual:e})"
    )]
    NoCertificate { residual: f64 },
    #[error("empty evaluation grid")]
    EmptyGrid,
    #[error("dataset has no observations")]
    EmptyData,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("survival data contain no events")]
    NoEvents,
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("Markov path needs at least three states")]
    PathTooShort,
    #[error("quadrature failed: {0}")]
    QuadratureFailure(&'static str),
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("Bernoulli array has zero total variance")]
    DegenerateVariance,
    #[error("information matrix is singular")]
    SingularInformation,
    #[error("risk set is empty at time {0}")]
    EmptyRiskSet(f64),
    #[error("unknown menu item: {0}")]
    UnknownMenuItem(String),
    #[error("{failures} of {replications} replications failed")]
    TooManyFailures {
        failures: usize,
        replications: usize,
    },
    #[error("population criterion is flat at its minimum")]
    NonUniqueMinimizer,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable variant name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFiniteObjective => "NonFiniteObjective",
            Error::MonotoneObjective(_) => "MonotoneObjective",
            Error::NoCertificate { .. } => "NoCertificate",
            Error::EmptyGrid => "EmptyGrid",
            Error::EmptyData => "EmptyData",
            Error::RankDeficient => "RankDeficient",
            Error::NoEvents => "NoEvents",
            Error::DegenerateData(_) => "DegenerateData",
            Error::PathTooShort => "PathTooShort",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::AllZeroWeights => "AllZeroWeights",
            Error::DegenerateVariance => "DegenerateVariance",
            Error::SingularInformation => "SingularInformation",
            Error::EmptyRiskSet(_) => "EmptyRiskSet",
            Error::UnknownMenuItem(_) => "UnknownMenuItem",
            Error::TooManyFailures { .. } => "TooManyFailures",
            Error::NonUniqueMinimizer => "NonUniqueMinimizer",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// True for failures that come from the estimation problem itself
    /// (separation, missing events, rank) rather than from malformed input.
    pub fn is_estimation_failure(&self) -> bool {
        matches!(
            self,
            Error::MonotoneObjective(_)
                | Error::NoCertificate { .. }
                | Error::RankDeficient
                | Error::NoEvents
                | Error::SingularInformation
                | Error::NonUniqueMinimizer
                | Error::QuadratureFailure(_)
                | Error::DegenerateData(_)
                | Error::DegenerateVariance
                | Error::AllZeroWeights
                | Error::EmptyRiskSet(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
