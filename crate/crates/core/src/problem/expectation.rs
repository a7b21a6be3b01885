//! Expected-value maps: exact finite sums, Monte Carlo estimates, and the
//! frozen sample averages the deterministic solvers run on.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::ProblemInstance;
use super::map::ScenarioMap;
use super::scenario::sample_scenarios;
use crate::error::{check_dim, Error, Result};
use crate::io::serde_helpers;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExpectationMode {
    ExactFiniteSum,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate {
    #[serde(with = "serde_helpers::vector")]
    pub value: DVector<f64>,
    pub mode: ExpectationMode,
    /// Per-component standard error (Monte Carlo only).
    pub stderr: Option<Vec<f64>>,
}

/// `E[F(x;ω)]`, exactly or by Monte Carlo.
pub fn expected_map(
    problem: &ProblemInstance,
    x: &DVector<f64>,
    mode: ExpectationMode,
) -> Result<ExpectationEstimate> {
    check_dim("expected_map", problem.dim, x.len())?;
    match mode {
        ExpectationMode::ExactFiniteSum => {
            let outcomes = problem
                .scenarios
                .weighted_outcomes()
                .ok_or(Error::ExactSumOnSampler)?;
            let mut value = DVector::zeros(problem.dim);
            for o in &outcomes {
                value += problem.map.eval(x, &o.omega)? * o.weight;
            }
            Ok(ExpectationEstimate {
                value,
                mode,
                stderr: None,
            })
        }
        ExpectationMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::config("samples", "must be at least 1"));
            }
            let omegas = sample_scenarios(&problem.scenarios, samples, seed);
            let values = omegas
                .iter()
                .map(|w| problem.map.eval(x, w))
                .collect::<Result<Vec<_>>>()?;
            let n = samples as f64;
            let mean = values.iter().fold(DVector::zeros(problem.dim), |acc, v| acc + v) / n;
            let stderr = (0..problem.dim)
                .map(|i| {
                    if samples < 2 {
                        return f64::INFINITY;
                    }
                    let ss: f64 = values.iter().map(|v| (v[i] - mean[i]).powi(2)).sum();
                    (ss / (n - 1.0)).sqrt() / n.sqrt()
                })
                .collect();
            Ok(ExpectationEstimate {
                value: mean,
                mode,
                stderr: Some(stderr),
            })
        }
    }
}

/// A deterministic vector field `x ↦ F(x)` on `R^n`.
pub trait DeterministicMap: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Defaults to central differences.
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        for c in 0..n {
            let h = 1e-7 * (1.0 + x[c].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let col = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
            j.set_column(c, &col);
        }
        j
    }

    /// Whether the map is affine (constant Jacobian).
    fn is_affine(&self) -> bool {
        false
    }
}

/// Wraps a closure as a [`DeterministicMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> DeterministicMap for FnMap<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
}

/// Minimum scenario count before averages are evaluated on worker threads.
const PARALLEL_THRESHOLD: usize = 256;

/// A frozen average `Σ_k w_k F(·;ω_k)`.
///
/// Maps that are affine in `ω` collapse to a single affine map evaluated at
/// the averaged `ω`.
#[derive(Clone, Debug)]
pub enum AveragedMap {
    Affine {
        matrix: DMatrix<f64>,
        rhs: DVector<f64>,
    },
    Weighted {
        map: ScenarioMap,
        omegas: Vec<DVector<f64>>,
        weights: Vec<f64>,
    },
}

impl AveragedMap {
    pub fn affine(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        AveragedMap::Affine { matrix, rhs }
    }

    /// Average over explicit scenarios and weights.
    pub fn from_scenarios(map: &ScenarioMap, omegas: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if map.is_interval() {
            return Err(Error::IntervalValuedMap);
        }
        if omegas.is_empty() || omegas.len() != weights.len() {
            return Err(Error::InvalidScenarioModel(
                "averaged map needs one weight per scenario".into(),
            ));
        }
        if let ScenarioMap::RandomAffine(a) = map {
            if a.m_omega.is_empty() {
                let d = omegas[0].len();
                let mut mean = DVector::zeros(d);
                for (w, p) in omegas.iter().zip(&weights) {
                    mean += w * *p;
                }
                let total: f64 = weights.iter().sum();
                let rhs = a.q_base.clone() * total
                    + if a.q_omega.ncols() == 0 {
                        DVector::zeros(a.dim())
                    } else {
                        &a.q_omega * mean.rows(0, a.q_omega.ncols())
                    };
                return Ok(AveragedMap::Affine {
                    matrix: a.m_base.clone() * total,
                    rhs,
                });
            }
        }
        Ok(AveragedMap::Weighted {
            map: map.clone(),
            omegas,
            weights,
        })
    }

    /// Exact expectation over a finite scenario model.
    pub fn exact(problem: &ProblemInstance) -> Result<Self> {
        let outcomes = problem
            .scenarios
            .weighted_outcomes()
            .ok_or(Error::ExactSumOnSampler)?;
        let (omegas, weights) = outcomes.into_iter().map(|o| (o.omega, o.weight)).unzip();
        Self::from_scenarios(&problem.map, omegas, weights)
    }

    /// Sample average over `n` seeded draws.
    pub fn sampled(problem: &ProblemInstance, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        let omegas = sample_scenarios(&problem.scenarios, n, seed);
        let weights = vec![1.0 / n as f64; n];
        Self::from_scenarios(&problem.map, omegas, weights)
    }

    /// High-accuracy stand-in for the true expectation: exact for finite
    /// models, closed form for affine maps, otherwise a large Monte Carlo
    /// average on a dedicated stream.
    pub fn reference(problem: &ProblemInstance, seed: u64) -> Result<Self> {
        if problem.scenarios.is_finite() {
            return Self::exact(problem);
        }
        let mean = problem.scenarios.mean();
        if let Some((matrix, rhs)) = problem.map.affine_at_mean(&mean) {
            return Ok(AveragedMap::Affine { matrix, rhs });
        }
        let seed = seed ^ (rng::STREAM_REFERENCE << 48);
        Self::sampled(problem, 20_000, seed)
    }

    pub fn scenario_count(&self) -> usize {
        match self {
            AveragedMap::Affine { .. } => 1,
            AveragedMap::Weighted { omegas, .. } => omegas.len(),
        }
    }
}

impl DeterministicMap for AveragedMap {
    fn dim(&self) -> usize {
        match self {
            AveragedMap::Affine { rhs, .. } => rhs.len(),
            AveragedMap::Weighted { map, .. } => map.dim(),
        }
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            AveragedMap::Affine { matrix, rhs } => matrix * x + rhs,
            AveragedMap::Weighted {
                map,
                omegas,
                weights,
            } => {
                let term = |(w, p): (&DVector<f64>, &f64)| {
                    map.eval(x, w).expect("validated single-valued map") * *p
                };
                let terms: Vec<DVector<f64>> = if omegas.len() >= PARALLEL_THRESHOLD {
                    omegas.par_iter().zip(weights.par_iter()).map(term).collect()
                } else {
                    omegas.iter().zip(weights.iter()).map(term).collect()
                };
                terms
                    .into_iter()
                    .fold(DVector::zeros(map.dim()), |acc, t| acc + t)
            }
        }
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            AveragedMap::Affine { matrix, .. } => matrix.clone(),
            AveragedMap::Weighted {
                map,
                omegas,
                weights,
            } => {
                let n = map.dim();
                omegas
                    .iter()
                    .zip(weights)
                    .fold(DMatrix::zeros(n, n), |acc, (w, p)| {
                        acc + map.jacobian(x, w).expect("validated single-valued map") * *p
                    })
            }
        }
    }

    fn is_affine(&self) -> bool {
        match self {
            AveragedMap::Affine { .. } => true,
            AveragedMap::Weighted { map, .. } => matches!(map, ScenarioMap::RandomAffine(_)),
        }
    }
}
