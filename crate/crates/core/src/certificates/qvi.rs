use nalgebra::DVector;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::rays::interval_inf_dot;
use super::{CertificateReport, Evidence, Verdict, Witness};
use crate::error::{check_dim, Error, Result};
use crate::problem::scenario::certificate_scenarios;
use crate::problem::{GroundSet, MovingSet, ProblemInstance};
use crate::rng;

/// Tolerance of the `x ∈ K(x)` and containment tests.
const MEMBERSHIP_TOL: f64 = 1e-9;

/// A bounded box `lower ≤ x ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("box upper", self.lower.len(), self.upper.len())?;
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::config("box", "bounds must be finite with lower <= upper"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn uniform(&self, rng: &mut rng::Rng) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| {
            self.lower[i] + (self.upper[i] - self.lower[i]) * rng.random::<f64>()
        })
    }

    /// All `2ⁿ` corners (n ≤ 12), else none.
    fn corners(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        if n > 12 {
            return Vec::new();
        }
        (0..1usize << n)
            .map(|mask| {
                DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] })
            })
            .collect()
    }

    /// Stratified boundary samples: the same number of uniform points on
    /// each of the `2n` faces.
    fn boundary_samples(&self, count: usize, rng: &mut rng::Rng) -> Vec<DVector<f64>> {
        let n = self.dim();
        let per_face = count.div_ceil(2 * n.max(1)).max(1);
        let mut pts = Vec::with_capacity(2 * n * per_face);
        for i in 0..n {
            for side in [self.lower[i], self.upper[i]] {
                for _ in 0..per_face {
                    let mut p = self.uniform(rng);
                    p[i] = side;
                    pts.push(p);
                }
            }
        }
        pts
    }
}

fn moving_set(problem: &ProblemInstance) -> Result<&MovingSet> {
    problem
        .moving_set
        .as_ref()
        .ok_or_else(|| Error::InvalidProblem("QVI certificates need a moving set".into()))
}

/// Samples the faces of `U`, keeps points with `x ∈ K(x)`, and checks
/// `inf_{w ∈ F(x;ω)} wᵀ(x − x_ref) ≥ −margin` for every sampled scenario.
pub fn qvi_boundary_certificate(
    problem: &ProblemInstance,
    region: &BoxRegion,
    x_ref: &DVector<f64>,
    boundary_samples: usize,
    scenario_draws: usize,
    seed: u64,
    margin: f64,
) -> Result<CertificateReport> {
    let ms = moving_set(problem)?;
    region.validate()?;
    check_dim("box", problem.dim, region.dim())?;
    check_dim("x_ref", problem.dim, x_ref.len())?;
    if (0..region.dim()).any(|i| !(region.lower[i] < x_ref[i] && x_ref[i] < region.upper[i])) {
        return Err(Error::config("xref", "reference point must be interior to the box"));
    }
    let mut rng = rng::task_stream(seed, rng::STREAM_CERT_POINTS, 4);
    let feasible: Vec<DVector<f64>> = region
        .boundary_samples(boundary_samples, &mut rng)
        .into_iter()
        .filter(|x| ms.is_fixed_point_feasible(&problem.set, x, MEMBERSHIP_TOL))
        .collect();
    let params = serde_json::json!({
        "lower": region.lower,
        "upper": region.upper,
        "x_ref": x_ref.as_slice(),
        "boundary_samples": boundary_samples,
        "feasible_boundary_points": feasible.len(),
        "scenario_draws": scenario_draws,
        "seed": seed,
        "margin": margin,
    });
    let mut report = CertificateReport::new("qvi-boundary", params);
    if feasible.is_empty() {
        report
            .notes
            .push("no sampled boundary point satisfies x in K(x): the condition holds vacuously".into());
        return Ok(report.finish(Vec::new()));
    }
    let mut witnesses = Vec::new();
    for sc in certificate_scenarios(&problem.scenarios, scenario_draws, seed) {
        let mut best = (f64::INFINITY, 0);
        for (k, x) in feasible.iter().enumerate() {
            let (lo, hi) = problem.map.eval_interval(x, &sc.omega)?;
            let v = interval_inf_dot(&lo, &hi, &(x - x_ref));
            if v < best.0 || v.is_nan() {
                best = (v, k);
            }
        }
        let verdict = if best.0 >= -margin { Verdict::Pass } else { Verdict::Fail };
        witnesses.push((verdict == Verdict::Fail).then(|| Witness {
            scenario: Some(sc.index),
            omega: Some(sc.omega.as_slice().to_vec()),
            point: Some(feasible[best.1].as_slice().to_vec()),
            value: best.0,
            ..Witness::default()
        }));
        report.evidence.push(Evidence {
            scenario: sc.index,
            direction: None,
            anchor: None,
            values: Vec::new(),
            tail_min: best.0,
            tail_slope: None,
            verdict,
        });
    }
    Ok(report.finish(witnesses))
}

/// Checks `K(x) ⊆ Γ` at the corners of `Γ` and at `probes` uniform points.
/// `K(x)` is a box, so containment is tested on its bounds; the witness
/// `other` is a point of `K(x)` outside `Γ`.
pub fn qvi_compactness_check(
    problem: &ProblemInstance,
    gamma: &BoxRegion,
    probes: usize,
    seed: u64,
) -> Result<CertificateReport> {
    let ms = moving_set(problem)?;
    gamma.validate()?;
    check_dim("box", problem.dim, gamma.dim())?;
    let mut rng = rng::task_stream(seed, rng::STREAM_CERT_POINTS, 5);
    let mut xs = gamma.corners();
    xs.extend((0..probes).map(|_| gamma.uniform(&mut rng)));
    let params = serde_json::json!({
        "lower": gamma.lower,
        "upper": gamma.upper,
        "probes": probes,
        "points_checked": xs.len(),
        "seed": seed,
    });
    let mut report = CertificateReport::new("qvi-compact", params);
    let mut worst: (f64, Option<(DVector<f64>, DVector<f64>)>) = (f64::INFINITY, None);
    let mut empty_images = 0;
    for x in &xs {
        let image = match ms.image(&problem.set, x) {
            Ok(GroundSet::Box { lower, upper }) => (lower, upper),
            Ok(_) => unreachable!("moving-set images are boxes"),
            Err(_) => {
                empty_images += 1;
                continue;
            }
        };
        let (lo, hi) = image;
        // Signed slack: negative when the image leaves Γ.
        let mut slack = f64::INFINITY;
        let mut escape = None;
        for i in 0..x.len() {
            for (s, out) in [(lo[i] - gamma.lower[i], lo[i]), (gamma.upper[i] - hi[i], hi[i])] {
                if s < slack {
                    slack = s;
                    escape = Some((i, out));
                }
            }
        }
        if slack < worst.0 {
            let point = escape.map(|(i, out)| {
                let mut p = DVector::from_fn(x.len(), |k, _| x[k].clamp(lo[k], hi[k]));
                if !out.is_finite() {
                    // Unbounded image: step one unit past Γ.
                    p[i] = if out > 0.0 { gamma.upper[i] + 1.0 } else { gamma.lower[i] - 1.0 };
                } else {
                    p[i] = out;
                }
                p
            });
            worst = (slack, point.map(|p| (x.clone(), p)));
        }
    }
    let verdict = if worst.0 >= -MEMBERSHIP_TOL { Verdict::Pass } else { Verdict::Fail };
    let witness = (verdict == Verdict::Fail).then(|| {
        let (x, p) = worst.1.clone().expect("failure has a point");
        Witness {
            point: Some(x.as_slice().to_vec()),
            other: Some(p.as_slice().to_vec()),
            value: worst.0,
            ..Witness::default()
        }
    });
    report.evidence.push(Evidence {
        scenario: 0,
        direction: None,
        anchor: None,
        values: Vec::new(),
        tail_min: worst.0,
        tail_slope: None,
        verdict,
    });
    if empty_images > 0 {
        report
            .notes
            .push(format!("{empty_images} sampled points have an empty image and were skipped"));
    }
    Ok(report.finish(vec![witness]))
}
