//! Sampled certificates for solvability conditions.
//!
//! Asymptotic conditions ("liminf as ‖x‖ → ∞") are evaluated along rays on a
//! finite geometric radii schedule. A (scenario, direction) cell passes when
//! the values at the last three radii all exceed the margin, fails when one
//! of them is at or below minus the margin, and is inconclusive otherwise.
//! "Almost surely" means every outcome of a finite model, or a fixed number
//! of seeded draws from a sampler. Every verdict is sampled evidence, not a
//! proof.

pub mod alternative;
pub mod lower_bound;
pub mod pairs;
pub mod qvi;
pub mod rays;

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::io::serde_helpers;
use crate::problem::scenario::certificate_scenarios;
use crate::problem::{GroundSet, ProblemInstance, WeightedScenario};
use crate::rng;

pub use alternative::{alternative_witness_search, AlternativePlan};
pub use lower_bound::{lower_bound_certificate, LowerBound, LowerBoundPlan, SampleRegion};
pub use pairs::{cocoercivity_certificate, monotonicity_probe, PairPlan};
pub use qvi::{qvi_boundary_certificate, qvi_compactness_check, BoxRegion};
pub use rays::{
    cartesian_coercivity_certificate, coercivity_certificate, copositive_r0_companion,
    monotone_coercivity_certificate, multivalued_coercivity_certificate, scp_growth_certificate,
    GrowthMode,
};

pub const DEFAULT_MARGIN: f64 = 1e-6;
pub const DEFAULT_R0: f64 = 1.0;
pub const DEFAULT_RADII_COUNT: usize = 12;
pub const DEFAULT_SCENARIO_DRAWS: usize = 64;
pub const DEFAULT_RANDOM_DIRECTIONS: usize = 8;
pub const TAIL_WINDOW: usize = 3;
/// Label attached to every report.
pub const EVIDENCE_LABEL: &str = "sampled evidence";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// A reproducible violation. Ray certificates set `direction`, `radius` and
/// `point = x_ref + radius·direction`; pair probes set `point` and `other`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<Vec<f64>>,
    /// Extra scalar parameter (for example a regularization weight).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub value: f64,
}

/// Statistics for one (scenario, direction[, anchor]) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub scenario: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    /// Minimum over the tail window (or the cell's decisive statistic).
    pub tail_min: f64,
    /// Sign of the last difference in the tail window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_slope: Option<i8>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub condition: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub label: String,
    pub params: serde_json::Value,
    pub evidence: Vec<Evidence>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub(crate) fn new(condition: &str, params: serde_json::Value) -> Self {
        Self {
            condition: condition.into(),
            verdict: Verdict::Pass,
            witness: None,
            label: EVIDENCE_LABEL.into(),
            params,
            evidence: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Folds cell verdicts: the first failing cell (in scenario, direction
    /// order) supplies the witness; otherwise any inconclusive cell makes the
    /// report inconclusive.
    pub(crate) fn finish(mut self, witnesses: Vec<Option<Witness>>) -> Self {
        let first_fail = self
            .evidence
            .iter()
            .zip(witnesses)
            .find(|(e, _)| e.verdict == Verdict::Fail);
        if let Some((_, w)) = first_fail {
            self.verdict = Verdict::Fail;
            self.witness = w;
        } else if self.evidence.iter().any(|e| e.verdict == Verdict::Inconclusive) {
            self.verdict = Verdict::Inconclusive;
        } else {
            self.verdict = Verdict::Pass;
        }
        self
    }
}

/// Tail-window decision on a sequence indexed by increasing radius.
/// Returns the verdict, the tail minimum and the index of that minimum.
pub fn tail_rule(values: &[f64], margin: f64) -> (Verdict, f64, usize) {
    if values.len() < TAIL_WINDOW {
        let (i, m) = argmin(values);
        return (Verdict::Inconclusive, m, i);
    }
    let start = values.len() - TAIL_WINDOW;
    let (i, m) = argmin(&values[start..]);
    let verdict = if values[start..].iter().any(|&v| !(v > -margin)) {
        Verdict::Fail
    } else if m > margin {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    (verdict, m, start + i)
}

pub(crate) fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv || v.is_nan() { (i, v) } else { (bi, bv) })
}

pub(crate) fn tail_slope(values: &[f64]) -> Option<i8> {
    let n = values.len();
    (n >= 2).then(|| {
        let d = values[n - 1] - values[n - 2];
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    })
}

/// Rays `x_ref + r·d`, radii `r_j = r0·2^j`, and the scenarios to test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayPlan {
    #[serde(with = "serde_helpers::vector")]
    pub x_ref: DVector<f64>,
    #[serde(with = "direction_list")]
    pub directions: Vec<DVector<f64>>,
    pub radii: Vec<f64>,
    /// Draws used for sampler models; finite models use every outcome.
    pub scenario_draws: usize,
    pub seed: u64,
    pub margin: f64,
}

/// Geometric schedule `r0·2^j`, `j = 0..=count`.
pub fn geometric_radii(r0: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|j| r0 * 2f64.powi(j as i32)).collect()
}

impl RayPlan {
    /// Default plan: the signed axes that are recession directions of the
    /// set, plus random unit recession directions, radii `2^j` for
    /// `j = 0..=12`, margin 1e-6.
    pub fn default_for(set: &GroundSet, x_ref: DVector<f64>, seed: u64) -> Self {
        let signs = set.recession_signs();
        Self {
            directions: default_directions(&signs, DEFAULT_RANDOM_DIRECTIONS, seed),
            x_ref,
            radii: geometric_radii(DEFAULT_R0, DEFAULT_RADII_COUNT),
            scenario_draws: DEFAULT_SCENARIO_DRAWS,
            seed,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn validate(&self, set: &GroundSet) -> Result<()> {
        check_dim("x_ref", set.dim(), self.x_ref.len())?;
        let proj = set.project(&self.x_ref)?;
        if (&proj - &self.x_ref).norm() > 1e-10 {
            return Err(Error::config("xref", "reference point must lie in the feasible set"));
        }
        for d in &self.directions {
            check_dim("direction", set.dim(), d.len())?;
            if !(d.norm() > 0.0) {
                return Err(Error::config("directions", "directions must be nonzero"));
            }
        }
        if self.radii.windows(2).any(|w| !(w[1] > w[0])) || self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::config("radii", "radii must be positive and strictly increasing"));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::config("margin", "must be nonnegative"));
        }
        Ok(())
    }

    pub(crate) fn scenarios(&self, problem: &ProblemInstance) -> Vec<WeightedScenario> {
        certificate_scenarios(&problem.scenarios, self.scenario_draws, self.seed)
    }

    pub(crate) fn params(&self) -> serde_json::Value {
        serde_json::json!({
            "x_ref": self.x_ref.as_slice(),
            "radii": self.radii,
            "directions": self.directions.iter().map(|d| d.as_slice().to_vec()).collect::<Vec<_>>(),
            "scenario_draws": self.scenario_draws,
            "seed": self.seed,
            "margin": self.margin,
        })
    }
}

/// Signed axes allowed by `signs` plus `random` unit directions with the
/// same sign restrictions.
pub fn default_directions(signs: &[(bool, bool)], random: usize, seed: u64) -> Vec<DVector<f64>> {
    let n = signs.len();
    let mut dirs = Vec::new();
    for (i, &(up, down)) in signs.iter().enumerate() {
        for (ok, s) in [(up, 1.0), (down, -1.0)] {
            if ok {
                let mut d = DVector::zeros(n);
                d[i] = s;
                dirs.push(d);
            }
        }
    }
    if signs.iter().all(|&(u, d)| !u && !d) {
        return dirs;
    }
    let target = dirs.len() + random;
    let mut rng = rng::stream(seed, rng::STREAM_CERT_POINTS);
    while dirs.len() < target {
        let d = DVector::from_iterator(
            n,
            signs.iter().map(|&(up, down)| {
                let z: f64 = rng.sample(StandardNormal);
                match (up, down) {
                    (true, true) => z,
                    (true, false) => z.abs(),
                    (false, true) => -z.abs(),
                    (false, false) => 0.0,
                }
            }),
        );
        let norm = d.norm();
        if norm > 1e-8 {
            dirs.push(d / norm);
        }
    }
    dirs
}

mod direction_list {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[DVector<f64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|d| d.as_slice().to_vec())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DVector<f64>>, D::Error> {
        Ok(Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(DVector::from_vec)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_rule_cases() {
        assert_eq!(tail_rule(&[1.0, 2.0, 3.0, 4.0], 1e-6).0, Verdict::Pass);
        assert_eq!(tail_rule(&[1.0, 2.0, -3.0, 4.0], 1e-6).0, Verdict::Fail);
        assert_eq!(tail_rule(&[-9.0, 2.0, 3.0, 4.0], 1e-6).0, Verdict::Pass);
        assert_eq!(tail_rule(&[1.0, 0.0, 0.0, 0.0], 1e-6).0, Verdict::Inconclusive);
        assert_eq!(tail_rule(&[1.0, 2.0], 1e-6).0, Verdict::Inconclusive);
    }

    #[test]
    fn orthant_directions() {
        let d = default_directions(&[(true, false); 2], 8, 1);
        assert_eq!(d.len(), 10);
        assert!(d.iter().all(|v| v.iter().all(|&x| x >= 0.0) && (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn bounded_set_has_no_directions() {
        assert!(default_directions(&[(false, false); 3], 8, 1).is_empty());
    }
}
