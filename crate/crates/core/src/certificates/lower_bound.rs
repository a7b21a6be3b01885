use nalgebra::DVector;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::rays::interval_inf_dot;
use super::{argmin, tail_slope, CertificateReport, Evidence, Verdict, Witness, DEFAULT_MARGIN, DEFAULT_SCENARIO_DRAWS, TAIL_WINDOW};
use crate::error::{check_dim, Error, Result};
use crate::io::serde_helpers;
use crate::problem::scenario::certificate_scenarios;
use crate::problem::{Expr, GroundSet, ProblemInstance};
use crate::rng;

/// The integrable bound `u(ω)` in `G(x;ω) ≥ −u(ω)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LowerBound {
    /// An expression in `ω` only.
    Explicit { u: Expr },
    /// Report the empirical lower envelope of `G` per scenario.
    Auto,
}

/// Where the `x` samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SampleRegion {
    /// `Π_K(x_ref + r·z)`, `z` uniform in `[-1,1]ⁿ`, for each radius.
    Expanding { radii: Vec<f64>, per_radius: usize },
    /// Uniform points of a bounded box, projected onto the set.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        count: usize,
    },
    Points { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPlan {
    #[serde(with = "serde_helpers::vector")]
    pub x_ref: DVector<f64>,
    pub region: SampleRegion,
    pub scenario_draws: usize,
    pub seed: u64,
    pub margin: f64,
}

impl LowerBoundPlan {
    /// 64 points per radius on radii `2^j`, `j = 0..=12`.
    pub fn default_for(x_ref: DVector<f64>, seed: u64) -> Self {
        Self {
            x_ref,
            region: SampleRegion::Expanding {
                radii: super::geometric_radii(super::DEFAULT_R0, super::DEFAULT_RADII_COUNT),
                per_radius: 64,
            },
            scenario_draws: DEFAULT_SCENARIO_DRAWS,
            seed,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Sample points grouped by shell (one group for non-expanding regions).
fn sample_points(set: &GroundSet, plan: &LowerBoundPlan) -> Result<Vec<Vec<DVector<f64>>>> {
    let n = set.dim();
    let mut rng = rng::task_stream(plan.seed, rng::STREAM_CERT_POINTS, 2);
    match &plan.region {
        SampleRegion::Expanding { radii, per_radius } => {
            if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::config("radii", "radii must be positive and strictly increasing"));
            }
            radii
                .iter()
                .map(|&r| {
                    (0..*per_radius)
                        .map(|_| {
                            let z = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
                            set.project(&(&plan.x_ref + z * r))
                        })
                        .collect()
                })
                .collect()
        }
        SampleRegion::Box { lower, upper, count } => {
            check_dim("sample box", n, lower.len())?;
            check_dim("sample box", n, upper.len())?;
            if lower.iter().zip(upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
                return Err(Error::config("region", "sample box must be finite and nonempty"));
            }
            let pts = (0..*count)
                .map(|_| {
                    let z = DVector::from_fn(n, |i, _| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>());
                    set.project(&z)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![pts])
        }
        SampleRegion::Points { points } => {
            let pts = points
                .iter()
                .map(|p| {
                    check_dim("sample point", n, p.len())?;
                    Ok(DVector::from_column_slice(p))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![pts])
        }
    }
}

/// `G(x;ω) = inf_{w ∈ F(x;ω)} wᵀ(x − x_ref)`.
fn g_value(problem: &ProblemInstance, x: &DVector<f64>, x_ref: &DVector<f64>, omega: &DVector<f64>) -> Result<f64> {
    let (lo, hi) = problem.map.eval_interval(x, omega)?;
    Ok(interval_inf_dot(&lo, &hi, &(x - x_ref)))
}

/// Checks `G(x;ω) ≥ −u(ω)` on sampled `(x, ω)`. With [`LowerBound::Auto`]
/// the report holds the per-scenario lower envelope of `G` by radius; a
/// strictly falling envelope over the last three radii fails, a flat one
/// passes.
pub fn lower_bound_certificate(
    problem: &ProblemInstance,
    plan: &LowerBoundPlan,
    bound: &LowerBound,
) -> Result<CertificateReport> {
    check_dim("x_ref", problem.dim, plan.x_ref.len())?;
    if let LowerBound::Explicit { u } = bound {
        u.validate()?;
        if u.arity().0 > 0 {
            return Err(Error::config("u", "the bound may depend on omega only"));
        }
    }
    let shells = sample_points(&problem.set, plan)?;
    let scenarios = certificate_scenarios(&problem.scenarios, plan.scenario_draws, plan.seed);
    let mut params = serde_json::json!({
        "x_ref": plan.x_ref.as_slice(),
        "region": plan.region,
        "scenario_draws": plan.scenario_draws,
        "seed": plan.seed,
        "margin": plan.margin,
        "bound": bound,
    });
    let mut report = CertificateReport::new("lower-bound", serde_json::Value::Null);
    let mut witnesses = Vec::new();
    let mut envelope_mins = Vec::new();
    for sc in &scenarios {
        // Minimum of G per shell, with the minimizer.
        let mut shell_min = Vec::with_capacity(shells.len());
        for shell in &shells {
            let mut best = (f64::INFINITY, None);
            for x in shell {
                let g = g_value(problem, x, &plan.x_ref, &sc.omega)?;
                if g < best.0 || g.is_nan() {
                    best = (g, Some(x));
                }
            }
            shell_min.push(best);
        }
        let witness_at = |k: usize, value: f64| Witness {
            scenario: Some(sc.index),
            omega: Some(sc.omega.as_slice().to_vec()),
            point: shell_min[k].1.map(|x| x.as_slice().to_vec()),
            value,
            ..Witness::default()
        };
        let (evidence, witness) = match bound {
            LowerBound::Explicit { u } => {
                let uw = u.eval(&[], sc.omega.as_slice());
                let slack: Vec<f64> = shell_min.iter().map(|(g, _)| g + uw).collect();
                let (k, m) = argmin(&slack);
                let verdict = if !(m >= -plan.margin) { Verdict::Fail } else { Verdict::Pass };
                let witness = (verdict == Verdict::Fail).then(|| witness_at(k, shell_min[k].0));
                let e = Evidence {
                    scenario: sc.index,
                    direction: None,
                    anchor: None,
                    tail_slope: None,
                    values: slack,
                    tail_min: m,
                    verdict,
                };
                (e, witness)
            }
            LowerBound::Auto => {
                let mut env = Vec::with_capacity(shell_min.len());
                let mut run = f64::INFINITY;
                for (g, _) in &shell_min {
                    run = run.min(*g);
                    env.push(run);
                }
                let (k, m) = argmin(&shell_min.iter().map(|s| s.0).collect::<Vec<_>>());
                envelope_mins.push(m);
                let verdict = envelope_verdict(&env, plan.margin, shells.len() > 1);
                let witness = (verdict == Verdict::Fail).then(|| witness_at(k, m));
                let e = Evidence {
                    scenario: sc.index,
                    direction: None,
                    anchor: None,
                    tail_slope: tail_slope(&env),
                    values: env,
                    tail_min: m,
                    verdict,
                };
                (e, witness)
            }
        };
        report.evidence.push(evidence);
        witnesses.push(witness);
    }
    if !envelope_mins.is_empty() {
        let mean = envelope_mins.iter().zip(&scenarios).map(|(m, s)| m * s.weight).sum::<f64>();
        params["envelope_mean"] = serde_json::json!(mean);
        if shells.len() == 1 {
            report
                .notes
                .push("bounded sample region: the envelope is finite on it by construction".into());
        }
    }
    report.params = params;
    Ok(report.finish(witnesses))
}

/// Verdict on a nonincreasing envelope indexed by radius.
fn envelope_verdict(env: &[f64], margin: f64, expanding: bool) -> Verdict {
    if env.iter().any(|v| !v.is_finite()) {
        return Verdict::Fail;
    }
    if !expanding {
        return Verdict::Pass;
    }
    if env.len() < TAIL_WINDOW {
        return Verdict::Inconclusive;
    }
    let tail = &env[env.len() - TAIL_WINDOW..];
    let tol = |v: f64| margin * (1.0 + v.abs());
    if tail.windows(2).all(|w| w[0] - w[1] > tol(w[0])) {
        Verdict::Fail
    } else if tail.windows(2).all(|w| w[0] - w[1] <= tol(w[0])) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}
