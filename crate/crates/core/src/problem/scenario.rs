use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub omega: Vec<f64>,
    pub prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum CoordinateDist {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
}

impl CoordinateDist {
    pub fn mean(&self) -> f64 {
        match *self {
            CoordinateDist::Uniform { low, high } => 0.5 * (low + high),
            CoordinateDist::Normal { mean, .. } => mean,
        }
    }

    /// A range that holds the support, or `mean ± 6 sd` for normals.
    pub fn effective_range(&self) -> (f64, f64) {
        match *self {
            CoordinateDist::Uniform { low, high } => (low, high),
            CoordinateDist::Normal { mean, sd } => (mean - 6.0 * sd, mean + 6.0 * sd),
        }
    }

    fn sample(&self, rng: &mut rng::Rng) -> f64 {
        match *self {
            CoordinateDist::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            CoordinateDist::Normal { mean, sd } => Normal::new(mean, sd)
                .expect("validated normal parameters")
                .sample(rng),
        }
    }
}

/// The probability space of the random parameter `ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioModel {
    FiniteDiscrete { outcomes: Vec<Outcome> },
    Sampler { coordinates: Vec<CoordinateDist>, seed: u64 },
}

/// A scenario together with its weight in an average.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedScenario {
    pub index: usize,
    pub omega: DVector<f64>,
    pub weight: f64,
}

impl ScenarioModel {
    pub fn two_point(omega1: Vec<f64>, omega2: Vec<f64>) -> Self {
        ScenarioModel::FiniteDiscrete {
            outcomes: vec![
                Outcome {
                    omega: omega1,
                    prob: 0.5,
                },
                Outcome {
                    omega: omega2,
                    prob: 0.5,
                },
            ],
        }
    }

    pub fn single(omega: Vec<f64>) -> Self {
        ScenarioModel::FiniteDiscrete {
            outcomes: vec![Outcome { omega, prob: 1.0 }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScenarioModel::FiniteDiscrete { outcomes } => {
                if outcomes.is_empty() {
                    return Err(Error::InvalidScenarioModel("no outcomes".into()));
                }
                let dim = outcomes[0].omega.len();
                let mut total = 0.0;
                for (k, o) in outcomes.iter().enumerate() {
                    if o.omega.len() != dim {
                        return Err(Error::InvalidScenarioModel(format!(
                            "outcome {k} has dimension {}, expected {dim}",
                            o.omega.len()
                        )));
                    }
                    if !(o.prob >= 0.0) || o.omega.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidScenarioModel(format!(
                            "outcome {k} has probability {} or non-finite coordinates",
                            o.prob
                        )));
                    }
                    total += o.prob;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidScenarioModel(format!(
                        "probabilities sum to {total}"
                    )));
                }
                Ok(())
            }
            ScenarioModel::Sampler { coordinates, .. } => {
                for (k, c) in coordinates.iter().enumerate() {
                    let ok = match *c {
                        CoordinateDist::Uniform { low, high } => {
                            low.is_finite() && high.is_finite() && low <= high
                        }
                        CoordinateDist::Normal { mean, sd } => {
                            mean.is_finite() && sd.is_finite() && sd >= 0.0
                        }
                    };
                    if !ok {
                        return Err(Error::InvalidScenarioModel(format!(
                            "coordinate {k} has invalid parameters {c:?}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn omega_dim(&self) -> usize {
        match self {
            ScenarioModel::FiniteDiscrete { outcomes } => {
                outcomes.first().map_or(0, |o| o.omega.len())
            }
            ScenarioModel::Sampler { coordinates, .. } => coordinates.len(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ScenarioModel::FiniteDiscrete { .. })
    }

    /// The seed stored in a sampler model, 0 for finite models.
    pub fn default_seed(&self) -> u64 {
        match self {
            ScenarioModel::Sampler { seed, .. } => *seed,
            ScenarioModel::FiniteDiscrete { .. } => 0,
        }
    }

    /// `E[ω]` in closed form.
    pub fn mean(&self) -> DVector<f64> {
        match self {
            ScenarioModel::FiniteDiscrete { outcomes } => {
                let mut m = DVector::zeros(self.omega_dim());
                for o in outcomes {
                    m += DVector::from_column_slice(&o.omega) * o.prob;
                }
                m
            }
            ScenarioModel::Sampler { coordinates, .. } => {
                DVector::from_iterator(coordinates.len(), coordinates.iter().map(CoordinateDist::mean))
            }
        }
    }

    /// All outcomes with their probabilities (finite models only).
    pub fn weighted_outcomes(&self) -> Option<Vec<WeightedScenario>> {
        match self {
            ScenarioModel::FiniteDiscrete { outcomes } => Some(
                outcomes
                    .iter()
                    .enumerate()
                    .map(|(index, o)| WeightedScenario {
                        index,
                        omega: DVector::from_column_slice(&o.omega),
                        weight: o.prob,
                    })
                    .collect(),
            ),
            ScenarioModel::Sampler { .. } => None,
        }
    }

    /// Points whose convex hull covers the (effective) support; used to
    /// validate sign conditions on maps that are affine in `ω`.
    pub fn support_corners(&self) -> Vec<DVector<f64>> {
        match self {
            ScenarioModel::FiniteDiscrete { outcomes } => outcomes
                .iter()
                .map(|o| DVector::from_column_slice(&o.omega))
                .collect(),
            ScenarioModel::Sampler { coordinates, .. } => {
                let d = coordinates.len();
                assert!(d < 20, "too many coordinates to enumerate corners");
                (0..1usize << d)
                    .map(|mask| {
                        DVector::from_iterator(
                            d,
                            coordinates.iter().enumerate().map(|(k, c)| {
                                let (lo, hi) = c.effective_range();
                                if mask >> k & 1 == 1 {
                                    hi
                                } else {
                                    lo
                                }
                            }),
                        )
                    })
                    .collect()
            }
        }
    }

    fn draw(&self, rng: &mut rng::Rng) -> DVector<f64> {
        match self {
            ScenarioModel::FiniteDiscrete { outcomes } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let last = outcomes.len() - 1;
                for (k, o) in outcomes.iter().enumerate() {
                    acc += o.prob;
                    if u < acc || k == last {
                        return DVector::from_column_slice(&o.omega);
                    }
                }
                unreachable!("outcome list is non-empty")
            }
            ScenarioModel::Sampler { coordinates, .. } => DVector::from_iterator(
                coordinates.len(),
                coordinates.iter().map(|c| c.sample(rng)),
            ),
        }
    }
}

/// Draws `n` i.i.d. scenarios. Finite models use the inverse CDF; the same
/// `(model, n, seed)` always produces the same list.
pub fn sample_scenarios(model: &ScenarioModel, n: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = rng::stream(seed, rng::STREAM_SCENARIOS);
    (0..n).map(|_| model.draw(&mut rng)).collect()
}

/// Draws from an explicit stream, for callers that manage their own streams.
pub fn sample_with(model: &ScenarioModel, n: usize, rng: &mut rng::Rng) -> Vec<DVector<f64>> {
    (0..n).map(|_| model.draw(rng)).collect()
}

/// Scenarios standing in for "almost every ω": all outcomes of a finite
/// model, or `count` seeded draws from a sampler.
pub fn certificate_scenarios(model: &ScenarioModel, count: usize, seed: u64) -> Vec<WeightedScenario> {
    if let Some(all) = model.weighted_outcomes() {
        return all;
    }
    let mut rng = rng::stream(seed, rng::STREAM_CERT_SCENARIOS);
    let w = 1.0 / count.max(1) as f64;
    (0..count)
        .map(|index| WeightedScenario {
            index,
            omega: model.draw(&mut rng),
            weight: w,
        })
        .collect()
}
