use nalgebra::DVector;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CertificateReport, Evidence, Verdict, Witness, DEFAULT_MARGIN, DEFAULT_SCENARIO_DRAWS};
use crate::error::{check_dim, Error, Result};
use crate::problem::scenario::certificate_scenarios;
use crate::problem::{ProblemInstance, WeightedScenario};
use crate::rng;

/// Threshold below which a sampled pair violates monotonicity.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Pairs whose image difference is smaller than this are skipped in the
/// co-coercivity ratio.
const RATIO_DENOM_MIN: f64 = 1e-12;

/// Random pairs `(x, y)` drawn as `Π_K(z)`, `z` uniform in
/// `[-radius, radius]ⁿ`, for each scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPlan {
    pub pair_count: usize,
    pub radius: f64,
    pub scenario_draws: usize,
    pub seed: u64,
    pub margin: f64,
}

impl Default for PairPlan {
    fn default() -> Self {
        Self {
            pair_count: 500,
            radius: 10.0,
            scenario_draws: DEFAULT_SCENARIO_DRAWS,
            seed: 0,
            margin: DEFAULT_MARGIN,
        }
    }
}

impl PairPlan {
    fn params(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain struct")
    }

    fn pairs(&self, problem: &ProblemInstance) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
        if !(self.radius > 0.0) || self.pair_count == 0 {
            return Err(Error::config("pairs", "need a positive radius and at least one pair"));
        }
        let n = problem.dim;
        let mut rng = rng::task_stream(self.seed, rng::STREAM_CERT_POINTS, 3);
        let mut draw = || -> Result<DVector<f64>> {
            let z = DVector::from_fn(n, |_, _| rng.random_range(-self.radius..=self.radius));
            problem.set.project(&z)
        };
        (0..self.pair_count).map(|_| Ok((draw()?, draw()?))).collect()
    }
}

type Cell = (Evidence, Option<Witness>);

/// Evaluates `stat(F(x;ω), F(y;ω), x, y)` on every pair and scenario; a cell
/// fails at its minimum when that minimum is below `threshold`.
fn pair_cells<S>(
    problem: &ProblemInstance,
    scenarios: &[WeightedScenario],
    pairs: &[(DVector<f64>, DVector<f64>)],
    threshold: f64,
    stat: S,
) -> Result<Vec<Cell>>
where
    S: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>, &DVector<f64>) -> Option<f64> + Sync,
{
    scenarios
        .par_iter()
        .map(|sc| {
            let mut best: (f64, Option<usize>) = (f64::INFINITY, None);
            for (k, (x, y)) in pairs.iter().enumerate() {
                let fx = problem.map.eval(x, &sc.omega)?;
                let fy = problem.map.eval(y, &sc.omega)?;
                if let Some(v) = stat(&fx, &fy, x, y) {
                    if v < best.0 || v.is_nan() {
                        best = (v, Some(k));
                    }
                }
            }
            let verdict = if best.0 < threshold || best.0.is_nan() { Verdict::Fail } else { Verdict::Pass };
            let witness = (verdict == Verdict::Fail).then(|| {
                let (x, y) = &pairs[best.1.expect("failing cell has a pair")];
                Witness {
                    scenario: Some(sc.index),
                    omega: Some(sc.omega.as_slice().to_vec()),
                    point: Some(x.as_slice().to_vec()),
                    other: Some(y.as_slice().to_vec()),
                    value: best.0,
                    ..Witness::default()
                }
            });
            let e = Evidence {
                scenario: sc.index,
                direction: None,
                anchor: None,
                values: Vec::new(),
                tail_min: best.0,
                tail_slope: None,
                verdict,
            };
            Ok((e, witness))
        })
        .collect()
}

fn single_valued(problem: &ProblemInstance) -> Result<()> {
    if problem.map.is_interval() {
        Err(Error::IntervalValuedMap)
    } else {
        Ok(())
    }
}

/// Samples `(x, y, ω)` and fails on `(F(x;ω) − F(y;ω))ᵀ(x − y) < −1e-10`.
pub fn monotonicity_probe(problem: &ProblemInstance, plan: &PairPlan) -> Result<CertificateReport> {
    single_valued(problem)?;
    let pairs = plan.pairs(problem)?;
    let scenarios = certificate_scenarios(&problem.scenarios, plan.scenario_draws, plan.seed);
    let cells = pair_cells(problem, &scenarios, &pairs, -MONOTONE_TOL, |fx, fy, x, y| {
        Some((fx - fy).dot(&(x - y)))
    })?;
    let mut report = CertificateReport::new("monotone", plan.params());
    let witnesses = cells
        .into_iter()
        .map(|(e, w)| {
            report.evidence.push(e);
            w
        })
        .collect();
    report
        .notes
        .push("monotonicity is probed on sampled pairs only".into());
    Ok(report.finish(witnesses))
}

/// Co-coercivity `(H(x)−H(y))ᵀ(x−y) ≥ η‖H(x)−H(y)‖²` on sampled pairs, and
/// `H(u;ω) > margin` componentwise at the candidate `u`.
///
/// The report's `eta_hat` parameter is the smallest sampled ratio.
pub fn cocoercivity_certificate(
    problem: &ProblemInstance,
    plan: &PairPlan,
    u_candidate: Option<&DVector<f64>>,
) -> Result<CertificateReport> {
    single_valued(problem)?;
    if let Some(u) = u_candidate {
        check_dim("u_candidate", problem.dim, u.len())?;
    }
    let pairs = plan.pairs(problem)?;
    let scenarios = certificate_scenarios(&problem.scenarios, plan.scenario_draws, plan.seed);
    let cells = pair_cells(problem, &scenarios, &pairs, plan.margin, |fx, fy, x, y| {
        let dh = fx - fy;
        let denom = dh.norm_squared();
        (denom > RATIO_DENOM_MIN).then(|| dh.dot(&(x - y)) / denom)
    })?;
    let eta_hat = cells.iter().map(|(e, _)| e.tail_min).fold(f64::INFINITY, f64::min);
    let mut params = plan.params();
    params["eta_hat"] = if eta_hat.is_finite() { serde_json::json!(eta_hat) } else { serde_json::Value::Null };
    params["u_candidate"] = serde_json::json!(u_candidate.map(|u| u.as_slice().to_vec()));
    let mut report = CertificateReport::new("cocoercive", params);
    let mut witnesses = Vec::new();
    for (e, w) in cells {
        report.evidence.push(e);
        witnesses.push(w);
    }
    match u_candidate {
        Some(u) => {
            for sc in &scenarios {
                let h = problem.map.eval(u, &sc.omega)?;
                let m = h.min();
                let verdict = if m > plan.margin { Verdict::Pass } else { Verdict::Fail };
                witnesses.push((verdict == Verdict::Fail).then(|| Witness {
                    scenario: Some(sc.index),
                    omega: Some(sc.omega.as_slice().to_vec()),
                    point: Some(u.as_slice().to_vec()),
                    value: m,
                    ..Witness::default()
                }));
                report.evidence.push(Evidence {
                    scenario: sc.index,
                    direction: None,
                    anchor: Some(0),
                    values: Vec::new(),
                    tail_min: m,
                    tail_slope: None,
                    verdict,
                });
            }
        }
        None => report
            .notes
            .push("no interior candidate given: only the ratio condition was checked".into()),
    }
    if !eta_hat.is_finite() {
        report
            .notes
            .push("every sampled pair had equal images; no ratio was formed".into());
    }
    Ok(report.finish(witnesses))
}
