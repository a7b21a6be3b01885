//! Solvers for the expected-value and almost-sure formulations.

pub mod erm;
pub mod extragradient;
pub mod qvi;
pub mod sa;
pub mod saa;
pub mod ssn;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::serde_helpers;
use crate::problem::{AveragedMap, ProblemInstance};

pub use erm::{erm_objective, erm_solve};
pub use extragradient::{extragradient_solve, lipschitz_estimate};
pub use qvi::qvi_fixed_point;
pub use sa::sa_solve;
pub use saa::{averaged_map_for, saa_solve};
pub use ssn::ssn_fb_solve;

pub const DETERMINISTIC_TOL: f64 = 1e-8;
pub const STOCHASTIC_TOL: f64 = 1e-4;
/// Residual beyond which an iteration is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Extragradient,
    Saa,
    Sa,
    Ssn,
    Erm,
    QviFp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Extragradient => "extragradient",
            Method::Saa => "saa",
            Method::Sa => "sa",
            Method::Ssn => "ssn",
            Method::Erm => "erm",
            Method::QviFp => "qvi-fp",
        }
    }

    fn is_stochastic(self) -> bool {
        matches!(self, Method::Sa)
    }

    fn default_max_iter(self) -> usize {
        match self {
            Method::Extragradient | Method::Saa => 100_000,
            Method::Sa => 100_000,
            Method::Ssn => 500,
            Method::Erm => 4_000,
            Method::QviFp => 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Diverged,
}

/// What the `residual` field of a [`SolveResult`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// `‖x − Π_K(x − F̄(x))‖₂`.
    Natural,
    /// Euclidean norm of the Fischer–Burmeister system.
    FbSystem,
    /// Length of the last accepted projected-gradient step of ERM.
    ErmStep,
    /// `‖x_{k+1} − x_k‖₂` of the outer fixed-point iteration.
    FixedPointStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Defaults to 1e-8, or 1e-4 for stochastic approximation.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Extragradient step; defaults to `0.9 / L̂`.
    pub step: Option<f64>,
    /// Stochastic approximation gain `θ` in `γ_k = θ / k`.
    pub theta: f64,
    /// Return the tail average of stochastic approximation iterates.
    pub averaging: bool,
    /// SAA / ERM sample size; `None` uses exact weights on finite models.
    pub samples: Option<usize>,
    /// ERM smoothing schedule `μ_k = mu0 · 2^{−k}`.
    pub mu0: f64,
    pub mu_stages: usize,
    pub seed: u64,
    pub record_trace: bool,
    #[serde(with = "serde_helpers::opt_vector", skip_serializing_if = "Option::is_none")]
    pub x0: Option<DVector<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: None,
            step: None,
            theta: 1.0,
            averaging: true,
            samples: None,
            mu0: 0.1,
            mu_stages: 8,
            seed: 0,
            record_trace: false,
            x0: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::config("tol", "must be positive"));
            }
        }
        if let Some(s) = self.step {
            if !(s > 0.0) {
                return Err(Error::config("step", "must be positive"));
            }
        }
        if !(self.theta > 0.0) {
            return Err(Error::config("theta", "must be positive"));
        }
        if self.samples == Some(0) {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if !(self.mu0 > 0.0) || self.mu_stages == 0 {
            return Err(Error::config("mu0", "smoothing schedule must be positive and non-empty"));
        }
        if self.max_iter == Some(0) {
            return Err(Error::config("max_iter", "must be at least 1"));
        }
        Ok(())
    }

    pub fn tol_for(&self, method: Method) -> f64 {
        self.tol.unwrap_or(if method.is_stochastic() {
            STOCHASTIC_TOL
        } else {
            DETERMINISTIC_TOL
        })
    }

    pub fn max_iter_for(&self, method: Method) -> usize {
        self.max_iter.unwrap_or(method.default_max_iter())
    }

    /// The strictly decreasing smoothing schedule.
    pub fn mu_schedule(&self) -> Vec<f64> {
        (0..self.mu_stages)
            .map(|k| self.mu0 * 0.5f64.powi(k as i32))
            .collect()
    }
}

/// Parameters a run actually used, echoed into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(with = "serde_helpers::vector")]
    pub x: DVector<f64>,
    pub residual: f64,
    pub residual_kind: ResidualKind,
    pub iterations: usize,
    pub status: SolveStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Starting point: the configured `x0`, or the projection of the origin.
pub(crate) fn start_point(problem: &ProblemInstance, config: &SolverConfig) -> Result<DVector<f64>> {
    match &config.x0 {
        Some(x0) => {
            crate::error::check_dim("x0", problem.dim, x0.len())?;
            Ok(x0.clone())
        }
        None => problem.set.project(&DVector::zeros(problem.dim)),
    }
}

pub(crate) fn averaged_or_error(problem: &ProblemInstance, config: &SolverConfig) -> Result<AveragedMap> {
    if problem.map.is_interval() {
        return Err(Error::IntervalValuedMap);
    }
    saa::averaged_map_for(problem, config)
}
