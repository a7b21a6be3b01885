use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::map::{ScenarioMap, Selector};
use super::scenario::ScenarioModel;
use super::set::{GroundSet, MovingSet};
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "SVI")]
    Svi,
    #[serde(rename = "SCP")]
    Scp,
    #[serde(rename = "MixedSCP")]
    MixedScp,
    #[serde(rename = "SQVI")]
    Sqvi,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Svi => "SVI",
            ProblemKind::Scp => "SCP",
            ProblemKind::MixedScp => "MixedSCP",
            ProblemKind::Sqvi => "SQVI",
        })
    }
}

/// A stochastic VI / CP / QVI: kind, feasible region, scenario map and
/// probability model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub dim: usize,
    pub set: GroundSet,
    /// Parametrization of `K(x)`; present exactly for `SQVI`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moving_set: Option<MovingSet>,
    pub map: ScenarioMap,
    pub scenarios: ScenarioModel,
}

impl ProblemInstance {
    pub fn new(
        kind: ProblemKind,
        set: GroundSet,
        map: ScenarioMap,
        scenarios: ScenarioModel,
    ) -> Result<Self> {
        let p = Self {
            kind,
            dim: map.dim(),
            set,
            moving_set: None,
            map,
            scenarios,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn new_sqvi(
        set: GroundSet,
        moving_set: MovingSet,
        map: ScenarioMap,
        scenarios: ScenarioModel,
    ) -> Result<Self> {
        let p = Self {
            kind: ProblemKind::Sqvi,
            dim: map.dim(),
            set,
            moving_set: Some(moving_set),
            map,
            scenarios,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.set.validate()?;
        self.map.validate()?;
        self.scenarios.validate()?;
        check_dim("map dimension", self.dim, self.map.dim())?;
        check_dim("set dimension", self.dim, self.set.dim())?;
        match self.kind {
            ProblemKind::Scp if !matches!(self.set, GroundSet::NonnegOrthant { .. }) => {
                return Err(Error::InvalidProblem(
                    "SCP requires a nonnegative orthant".into(),
                ))
            }
            ProblemKind::MixedScp if !matches!(self.set, GroundSet::MixedPartition { .. }) => {
                return Err(Error::InvalidProblem(
                    "MixedSCP requires a mixed partition set".into(),
                ))
            }
            _ => {}
        }
        if matches!(self.set, GroundSet::MixedPartition { .. }) && self.kind != ProblemKind::MixedScp {
            return Err(Error::InvalidProblem(
                "mixed partition sets are only valid for MixedSCP".into(),
            ));
        }
        match (&self.moving_set, self.kind) {
            (Some(m), ProblemKind::Sqvi) => m.validate(self.dim)?,
            (None, ProblemKind::Sqvi) => {
                return Err(Error::InvalidProblem("SQVI requires a moving set".into()))
            }
            (Some(_), _) => {
                return Err(Error::InvalidProblem(
                    "moving sets are only valid for SQVI".into(),
                ))
            }
            (None, _) => {}
        }
        if self.map.is_interval() && !matches!(self.kind, ProblemKind::Svi | ProblemKind::Sqvi) {
            return Err(Error::InvalidProblem(
                "interval-valued maps are supported for SVI and SQVI only".into(),
            ));
        }
        if let ScenarioMap::RandomAffine(a) = &self.map {
            if a.omega_dim() > self.scenarios.omega_dim() {
                return Err(Error::InvalidProblem(format!(
                    "map uses {} random coordinates but the scenario model has {}",
                    a.omega_dim(),
                    self.scenarios.omega_dim()
                )));
            }
        }
        Ok(())
    }

    /// `F(x;ω)` for single-valued maps.
    pub fn eval_map(&self, x: &DVector<f64>, omega: &DVector<f64>) -> Result<DVector<f64>> {
        self.map.eval(x, omega)
    }

    pub fn eval_selection(
        &self,
        x: &DVector<f64>,
        omega: &DVector<f64>,
        selector: &[Selector],
    ) -> Result<DVector<f64>> {
        self.map.eval_selection(x, omega, selector)
    }

    /// The same problem with its map multiplied by `c > 0`.
    pub fn with_scaled_map(&self, c: f64) -> Self {
        Self {
            map: self.map.scaled(c),
            ..self.clone()
        }
    }

    /// The feasible set at `x`: the ground set, or `K(x)` for SQVI.
    pub fn feasible_set_at(&self, x: &DVector<f64>) -> Result<GroundSet> {
        match &self.moving_set {
            Some(m) => m.image(&self.set, x),
            None => Ok(self.set.clone()),
        }
    }
}
