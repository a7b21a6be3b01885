use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{CertificateReport, Evidence, Verdict, Witness, TAIL_WINDOW};
use crate::error::{Error, Result};
use crate::problem::{DeterministicMap, FnMap, ProblemInstance, ProblemKind};
use crate::solvers::{averaged_or_error, ssn_fb_solve, SolveStatus, SolverConfig};

/// Regularization weights and the norm beyond which a trajectory counts as
/// unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternativePlan {
    /// Strictly decreasing positive weights.
    pub taus: Vec<f64>,
    pub max_radius: f64,
    /// SAA sample size for sampler models; exact weights otherwise.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for AlternativePlan {
    /// `τ = 10^0 … 10^-8` and the largest default ray radius, 4096.
    fn default() -> Self {
        Self {
            taus: (0..=8).map(|k| 10f64.powi(-k)).collect(),
            max_radius: super::DEFAULT_R0 * 2f64.powi(super::DEFAULT_RADII_COUNT as i32),
            samples: None,
            seed: 0,
        }
    }
}

/// Solves `CP(K, H̄ + τI)` along the τ grid, warm started. Fails with the
/// first solution whose norm exceeds `max_radius`; passes when the last
/// three solves converged to bounded, non-exploding points.
pub fn alternative_witness_search(problem: &ProblemInstance, plan: &AlternativePlan) -> Result<CertificateReport> {
    if !matches!(problem.kind, ProblemKind::Scp | ProblemKind::MixedScp) {
        return Err(Error::InvalidProblem(
            "the alternative search applies to complementarity problems".into(),
        ));
    }
    if plan.taus.is_empty()
        || plan.taus.iter().any(|t| !(*t > 0.0))
        || plan.taus.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::config("taus", "must be positive and strictly decreasing"));
    }
    if !(plan.max_radius > 0.0) {
        return Err(Error::config("max_radius", "must be positive"));
    }
    let comps = problem.set.cone_components().expect("validated cone");
    let base_config = SolverConfig {
        samples: plan.samples,
        seed: plan.seed,
        ..SolverConfig::default()
    };
    let hbar = averaged_or_error(problem, &base_config)?;
    let mut report = CertificateReport::new("alternative", serde_json::to_value(plan).expect("plain struct"));
    let mut norms = Vec::with_capacity(plan.taus.len());
    let mut converged = Vec::with_capacity(plan.taus.len());
    let mut trajectory = Vec::with_capacity(plan.taus.len());
    let mut x = DVector::zeros(problem.dim);
    let mut witness = None;
    for &tau in &plan.taus {
        let map = FnMap::new(problem.dim, |y: &DVector<f64>| hbar.eval(y) + y * tau);
        let config = SolverConfig {
            x0: Some(x.clone()),
            ..base_config.clone()
        };
        let r = ssn_fb_solve(&comps, &map, &x, &config)?;
        let ok = r.status == SolveStatus::Converged;
        if !ok {
            report
                .notes
                .push(format!("inner solve at tau = {tau:e} ended with {:?}, residual {:e}", r.status, r.residual));
        }
        let norm = r.x.norm();
        norms.push(norm);
        converged.push(ok);
        trajectory.push(r.x.as_slice().to_vec());
        if r.x.iter().all(|v| v.is_finite()) {
            x = r.x.clone();
        }
        if ok && norm > plan.max_radius && witness.is_none() {
            witness = Some(Witness {
                point: Some(r.x.as_slice().to_vec()),
                parameter: Some(tau),
                value: norm,
                ..Witness::default()
            });
        }
    }
    let tail = norms.len().saturating_sub(TAIL_WINDOW);
    let verdict = if witness.is_some() {
        Verdict::Fail
    } else if norms.len() < TAIL_WINDOW
        || !converged[tail..].iter().all(|&c| c)
        || norms[tail..].windows(2).any(|w| w[1] > 2.0 * w[0] + 1.0)
    {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    report.params["trajectory"] = serde_json::json!(trajectory);
    report.evidence.push(Evidence {
        scenario: 0,
        direction: None,
        anchor: None,
        tail_min: *norms.last().expect("non-empty grid"),
        tail_slope: super::tail_slope(&norms),
        values: norms,
        verdict,
    });
    Ok(report.finish(vec![witness]))
}
