use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("invalid scenario model: {0}")]
    InvalidScenarioModel(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("interval-valued map cannot be evaluated as a single-valued map; use eval_selection")]
    IntervalValuedMap,
    #[error("exact finite-sum expectation requested on a sampler scenario model")]
    ExactSumOnSampler,
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("instance size {n} exceeds the limit of {max}")]
    SizeLimit { n: usize, max: usize },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
