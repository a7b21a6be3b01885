use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tail_rule, tail_slope, CertificateReport, Evidence, RayPlan, Witness};
use crate::error::{Error, Result};
use crate::lcp::{is_copositive, is_r0_pair, DEFAULT_MAX_DEPTH, MAX_ENUMERATION_DIM};
use crate::problem::{ConeComponent, GroundSet, ProblemInstance, ProblemKind, WeightedScenario};
use crate::rng;

/// How growth of a complementarity map is measured along rays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMode {
    /// `min_i H_i(x;ω)` over the sign-constrained coordinates.
    ComponentwiseH,
    /// `xᵀH(x;ω)` over the sign-constrained coordinates.
    InnerProduct,
}

/// One ray family: a base point per anchor, the directions, and the value
/// `g(x, step, ω)` at `x = base + step`, `step = r·d`.
struct RaySweep<'a> {
    plan: &'a RayPlan,
    directions: Vec<DVector<f64>>,
    anchors: Vec<DVector<f64>>,
    scenarios: Vec<WeightedScenario>,
}

impl RaySweep<'_> {
    fn run<G>(&self, mut report: CertificateReport, value: G) -> Result<CertificateReport>
    where
        G: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> Result<f64> + Sync,
    {
        let mut cells = Vec::new();
        for (si, _) in self.scenarios.iter().enumerate() {
            for di in 0..self.directions.len() {
                for ai in 0..self.anchors.len() {
                    cells.push((si, di, ai));
                }
            }
        }
        let with_anchor = self.anchors.len() > 1;
        let results: Vec<Result<(Evidence, Option<Witness>)>> = cells
            .par_iter()
            .map(|&(si, di, ai)| {
                let sc = &self.scenarios[si];
                let d = &self.directions[di];
                let base = &self.anchors[ai];
                let mut values = Vec::with_capacity(self.plan.radii.len());
                let mut points = Vec::with_capacity(self.plan.radii.len());
                for &r in &self.plan.radii {
                    let step = d * r;
                    let x = base + &step;
                    values.push(value(&x, &step, &sc.omega)?);
                    points.push(x);
                }
                let (verdict, tail_min, at) = tail_rule(&values, self.plan.margin);
                let witness = (verdict == super::Verdict::Fail).then(|| Witness {
                    scenario: Some(sc.index),
                    omega: Some(sc.omega.as_slice().to_vec()),
                    direction: Some(d.as_slice().to_vec()),
                    radius: Some(self.plan.radii[at]),
                    point: Some(points[at].as_slice().to_vec()),
                    value: values[at],
                    ..Witness::default()
                });
                let evidence = Evidence {
                    scenario: sc.index,
                    direction: Some(di),
                    anchor: with_anchor.then_some(ai),
                    tail_slope: tail_slope(&values),
                    values,
                    tail_min,
                    verdict,
                };
                Ok((evidence, witness))
            })
            .collect();
        let mut witnesses = Vec::with_capacity(results.len());
        for r in results {
            let (e, w) = r?;
            report.evidence.push(e);
            witnesses.push(w);
        }
        if self.directions.is_empty() {
            report
                .notes
                .push("no recession directions: the set is bounded and the condition holds vacuously".into());
        }
        Ok(report.finish(witnesses))
    }
}

fn sweep<'a>(problem: &ProblemInstance, plan: &'a RayPlan) -> Result<RaySweep<'a>> {
    plan.validate(&problem.set)?;
    Ok(RaySweep {
        plan,
        directions: plan.directions.clone(),
        anchors: vec![plan.x_ref.clone()],
        scenarios: plan.scenarios(problem),
    })
}

fn require_single_valued(problem: &ProblemInstance) -> Result<()> {
    if problem.map.is_interval() {
        Err(Error::IntervalValuedMap)
    } else {
        Ok(())
    }
}

/// Tail rule on `g_j = F(x_ref + r_j d; ω)ᵀ(r_j d)`.
pub fn coercivity_certificate(problem: &ProblemInstance, plan: &RayPlan) -> Result<CertificateReport> {
    require_single_valued(problem)?;
    let s = sweep(problem, plan)?;
    let report = CertificateReport::new("coercivity", plan.params());
    s.run(report, |x, step, omega| Ok(problem.map.eval(x, omega)?.dot(step)))
}

/// Tail rule on `g_j = F(x_ref; ω)ᵀ(r_j d)`, linear in `r_j`; meaningful
/// when the map is monotone.
pub fn monotone_coercivity_certificate(problem: &ProblemInstance, plan: &RayPlan) -> Result<CertificateReport> {
    require_single_valued(problem)?;
    let s = sweep(problem, plan)?;
    let report = CertificateReport::new("monotone-coercivity", plan.params());
    s.run(report, |_, step, omega| {
        Ok(problem.map.eval(&plan.x_ref, omega)?.dot(step))
    })
}

/// Tail rule on `inf_{w ∈ Φ(x;ω)} wᵀ(x − x_ref)`. For interval images the
/// infimum picks the lower endpoint where `(x − x_ref)_i ≥ 0` and the upper
/// one elsewhere.
pub fn multivalued_coercivity_certificate(
    problem: &ProblemInstance,
    plan: &RayPlan,
) -> Result<CertificateReport> {
    let s = sweep(problem, plan)?;
    let report = CertificateReport::new("multivalued", plan.params());
    s.run(report, |x, step, omega| {
        let (lo, hi) = problem.map.eval_interval(x, omega)?;
        Ok(interval_inf_dot(&lo, &hi, step))
    })
}

/// `inf { wᵀs : lo ≤ w ≤ hi }`.
pub fn interval_inf_dot(lo: &DVector<f64>, hi: &DVector<f64>, s: &DVector<f64>) -> f64 {
    (0..s.len())
        .map(|i| if s[i] >= 0.0 { lo[i] * s[i] } else { hi[i] * s[i] })
        .sum()
}

/// Per-block coercivity on a Cartesian set: rays move only block `block`,
/// the other blocks sit at `anchor_count` sampled points of the set.
pub fn cartesian_coercivity_certificate(
    problem: &ProblemInstance,
    block: usize,
    plan: &RayPlan,
    anchor_count: usize,
) -> Result<CertificateReport> {
    require_single_valued(problem)?;
    let GroundSet::Cartesian { .. } = &problem.set else {
        return Err(Error::InvalidProblem(
            "cartesian coercivity needs a Cartesian set".into(),
        ));
    };
    let ranges = problem.set.block_ranges();
    let Some(range) = ranges.get(block).cloned() else {
        return Err(Error::config(
            "block",
            format!("block {block} out of range ({} blocks)", ranges.len()),
        ));
    };
    let mut s = sweep(problem, plan)?;
    s.directions = restrict_directions(&plan.directions, &range);
    s.anchors = block_anchors(&problem.set, &plan.x_ref, &range, anchor_count.max(1), plan.seed)?;
    let mut params = plan.params();
    params["block"] = serde_json::json!(block);
    params["anchors"] = serde_json::json!(s.anchors.iter().map(|a| a.as_slice().to_vec()).collect::<Vec<_>>());
    let report = CertificateReport::new("cartesian", params);
    let r = range.clone();
    s.run(report, move |x, step, omega| {
        let f = problem.map.eval(x, omega)?;
        Ok(f.rows(r.start, r.len()).dot(&step.rows(r.start, r.len())))
    })
}

/// Zeroes coordinates outside `keep` and renormalizes, dropping directions
/// that vanish.
fn restrict_directions(dirs: &[DVector<f64>], keep: &Range<usize>) -> Vec<DVector<f64>> {
    dirs.iter()
        .filter_map(|d| {
            let mut r = DVector::zeros(d.len());
            for i in keep.clone() {
                r[i] = d[i];
            }
            let n = r.norm();
            (n > 1e-12).then(|| r / n)
        })
        .collect()
}

/// Anchor 0 is `x_ref`; the others perturb the coordinates outside `block`
/// by up to one unit and project back onto the set.
fn block_anchors(
    set: &GroundSet,
    x_ref: &DVector<f64>,
    block: &Range<usize>,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    let mut rng = rng::task_stream(seed, rng::STREAM_CERT_POINTS, 1);
    let mut anchors = vec![x_ref.clone()];
    while anchors.len() < count {
        let mut a = x_ref.clone();
        for i in 0..a.len() {
            if !block.contains(&i) {
                a[i] += rng.random_range(-1.0..=1.0);
            }
        }
        let mut p = set.project(&a)?;
        for i in block.clone() {
            p[i] = x_ref[i];
        }
        anchors.push(p);
    }
    Ok(anchors)
}

/// Growth of a complementarity map `H` along rays in the cone. For mixed
/// problems rays move only the sign-constrained block and both modes only
/// look at that block.
pub fn scp_growth_certificate(
    problem: &ProblemInstance,
    plan: &RayPlan,
    mode: GrowthMode,
) -> Result<CertificateReport> {
    require_single_valued(problem)?;
    if !matches!(problem.kind, ProblemKind::Scp | ProblemKind::MixedScp) {
        return Err(Error::InvalidProblem(
            "growth certificate applies to complementarity problems".into(),
        ));
    }
    let comps = problem.set.cone_components().expect("validated cone");
    let nonneg: Vec<usize> = (0..comps.len()).filter(|&i| comps[i] == ConeComponent::Nonneg).collect();
    let mut s = sweep(problem, plan)?;
    let mut params = plan.params();
    params["mode"] = serde_json::json!(mode);
    let mut report = CertificateReport::new("scp-growth", params);
    if nonneg.len() < comps.len() {
        s.directions = restrict_directions(&plan.directions, &(0..nonneg.len()));
        report
            .notes
            .push("rays move only the sign-constrained block; the free block stays at x_ref".into());
    }
    s.run(report, |x, _, omega| {
        let h = problem.map.eval(x, omega)?;
        Ok(match mode {
            GrowthMode::ComponentwiseH => nonneg.iter().map(|&i| h[i]).fold(f64::INFINITY, f64::min),
            GrowthMode::InnerProduct => nonneg.iter().map(|&i| x[i] * h[i]).sum(),
        })
    })
}

/// A matrix that is copositive with `(Rⁿ₊, M)` an R0 pair: the identity,
/// checked with the LCP kernel.
pub fn copositive_r0_companion(n: usize) -> Result<DMatrix<f64>> {
    let m = DMatrix::identity(n, n);
    if !is_copositive(&m, DEFAULT_MAX_DEPTH, 1e-12).is_copositive() {
        return Err(Error::Solver("identity failed the copositivity check".into()));
    }
    if n <= MAX_ENUMERATION_DIM && !is_r0_pair(&m, 1e-12)?.is_r0() {
        return Err(Error::Solver("identity failed the R0 check".into()));
    }
    Ok(m)
}
