use nalgebra::DVector;

use super::{start_point, ConfigEcho, Method, ResidualKind, SolveResult, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::problem::scenario::sample_scenarios;
use crate::problem::{phi_fb, GroundSet, ProblemInstance, ProblemKind};

const ARMIJO_SIGMA: f64 = 1e-4;

/// Scenarios and weights of the (sampled) ERM objective.
struct ErmSample {
    omegas: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

impl ErmSample {
    fn new(problem: &ProblemInstance, config: &SolverConfig) -> Self {
        match (config.samples, problem.scenarios.weighted_outcomes()) {
            (None, Some(outcomes)) => Self {
                omegas: outcomes.iter().map(|o| o.omega.clone()).collect(),
                weights: outcomes.iter().map(|o| o.weight).collect(),
            },
            (n, _) => {
                let n = n.unwrap_or(super::saa::DEFAULT_SAA_SAMPLES);
                Self {
                    omegas: sample_scenarios(&problem.scenarios, n, config.seed),
                    weights: vec![1.0 / n as f64; n],
                }
            }
        }
    }
}

/// `Σ_k w_k ‖Φ_FB(x, F(x; ω_k))‖₂`, the (sampled) ERM objective.
pub fn erm_objective(problem: &ProblemInstance, x: &DVector<f64>, config: &SolverConfig) -> Result<f64> {
    let sample = ErmSample::new(problem, config);
    objective(problem, &sample, x)
}

fn objective(problem: &ProblemInstance, sample: &ErmSample, x: &DVector<f64>) -> Result<f64> {
    let mut total = 0.0;
    for (omega, w) in sample.omegas.iter().zip(&sample.weights) {
        let f = problem.map.eval(x, omega)?;
        total += w * x.zip_map(&f, phi_fb).norm();
    }
    Ok(total)
}

/// Smoothed objective `Σ w_k √(‖Φ_μ‖² + μ²)` and its gradient; `μ = 0`
/// gives the true objective with a generalized gradient.
fn smoothed(
    problem: &ProblemInstance,
    sample: &ErmSample,
    x: &DVector<f64>,
    mu: f64,
) -> Result<(f64, DVector<f64>)> {
    let n = x.len();
    let mut value = 0.0;
    let mut grad = DVector::zeros(n);
    for (omega, w) in sample.omegas.iter().zip(&sample.weights) {
        let f = problem.map.eval(x, omega)?;
        let jf = problem.map.jacobian(x, omega)?;
        let mut phi = DVector::zeros(n);
        let mut a = DVector::zeros(n);
        let mut b = DVector::zeros(n);
        for i in 0..n {
            let r = (x[i] * x[i] + f[i] * f[i] + mu * mu).sqrt();
            phi[i] = crate::problem::phi_fb_smoothed(x[i], f[i], mu);
            if r > 0.0 {
                a[i] = x[i] / r - 1.0;
                b[i] = f[i] / r - 1.0;
            } else {
                a[i] = std::f64::consts::FRAC_1_SQRT_2 - 1.0;
                b[i] = a[i];
            }
        }
        let norm = (phi.norm_squared() + mu * mu).sqrt();
        value += w * norm;
        if norm > 0.0 {
            // J = diag(a) + diag(b) ∇F
            let mut jt_phi = phi.component_mul(&a);
            jt_phi += jf.transpose() * phi.component_mul(&b);
            grad += jt_phi * (w / norm);
        }
    }
    Ok((value, grad))
}

/// Expected residual minimization over `x ≥ 0`.
///
/// Runs projected gradient with an Armijo search on the smoothed objective
/// for each `μ` in the schedule, then a final stage at `μ = 0`. The point
/// carried between stages is the best one found so far under the true
/// objective, so the reported objective never increases across stages.
pub fn erm_solve(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    if problem.kind != ProblemKind::Scp {
        return Err(Error::InvalidProblem(
            "ERM applies to complementarity problems over the nonnegative orthant".into(),
        ));
    }
    let tol = config.tol_for(Method::Erm);
    let max_iter = config.max_iter_for(Method::Erm);
    let sample = ErmSample::new(problem, config);
    let set = &problem.set;
    let mut x = set.project(&start_point(problem, config)?)?;
    let mut best = objective(problem, &sample, &x)?;
    let mut stage_objectives = Vec::new();
    let mut schedule = config.mu_schedule();
    schedule.push(0.0);
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    for &mu in &schedule {
        let (z, step, its) = projected_gradient(problem, &sample, set, x.clone(), mu, max_iter, tol)?;
        iterations += its;
        last_step = step;
        let value = objective(problem, &sample, &z)?;
        if value <= best {
            best = value;
            x = z;
        }
        stage_objectives.push(best);
    }
    let status = if last_step <= tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok(SolveResult {
        x,
        residual: last_step,
        residual_kind: ResidualKind::ErmStep,
        iterations,
        status,
        objective: Some(best),
        trace: Some(stage_objectives),
        config: ConfigEcho {
            method: Method::Erm,
            tol,
            max_iter,
            seed: config.seed,
            samples: config.samples,
            step: None,
        },
        notes: vec![format!(
            "smoothing schedule mu0 = {:e}, {} stages, final stage mu = 0; trace holds the objective after each stage",
            config.mu0, config.mu_stages
        )],
    })
}

/// Returns the final point, the last accepted step length and the
/// iteration count.
fn projected_gradient(
    problem: &ProblemInstance,
    sample: &ErmSample,
    set: &GroundSet,
    mut x: DVector<f64>,
    mu: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(DVector<f64>, f64, usize)> {
    let (mut value, mut grad) = smoothed(problem, sample, &x, mu)?;
    let mut t: f64 = 1.0;
    let mut step = f64::INFINITY;
    for k in 0..max_iter {
        let mut accepted = None;
        let mut trial_t = (t * 2.0).min(1e3);
        while trial_t > 1e-16 {
            let z = set.project(&(&x - &grad * trial_t))?;
            let (zv, zg) = smoothed(problem, sample, &z, mu)?;
            if zv <= value + ARMIJO_SIGMA * grad.dot(&(&z - &x)) {
                accepted = Some((z, zv, zg));
                break;
            }
            trial_t *= 0.5;
        }
        let Some((z, zv, zg)) = accepted else {
            return Ok((x, 0.0, k));
        };
        step = (&z - &x).norm();
        t = trial_t;
        x = z;
        value = zv;
        grad = zg;
        if step <= tol * 1e-2 {
            return Ok((x, step, k + 1));
        }
    }
    Ok((x, step, max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{RandomAffine, ScenarioMap, ScenarioModel};
    use nalgebra::DMatrix;

    fn example1(model: ScenarioModel) -> ProblemInstance {
        ProblemInstance::new(
            ProblemKind::Scp,
            GroundSet::orthant(2),
            ScenarioMap::RandomAffine(
                RandomAffine::with_random_rhs(
                    DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
                    DVector::from_column_slice(&[-2.0, -4.0]),
                    DMatrix::identity(2, 2),
                )
                .unwrap(),
            ),
            model,
        )
        .unwrap()
    }

    #[test]
    fn objective_at_expected_value_solution() {
        let p = example1(ScenarioModel::two_point(vec![1.0, 1.0], vec![-1.0, -1.0]));
        let x = DVector::from_column_slice(&[0.0, 2.0]);
        let v = erm_objective(&p, &x, &SolverConfig::default()).unwrap();
        let s5 = 5f64.sqrt();
        let expected = 0.5 * ((s5 - 3.0).abs() + (4.0 + (s5 - 1.0).powi(2)).sqrt());
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn one_scenario_recovers_its_solution() {
        let p = example1(ScenarioModel::single(vec![1.0, 1.0]));
        let r = erm_solve(&p, &SolverConfig::default()).unwrap();
        assert!(r.objective.unwrap() <= 1e-6);
        assert!((r.x - DVector::from_column_slice(&[0.0, 1.5])).norm() < 1e-5);
    }

    #[test]
    fn stage_objectives_non_increasing() {
        let p = example1(ScenarioModel::two_point(vec![1.0, 1.0], vec![-1.0, -1.0]));
        let r = erm_solve(&p, &SolverConfig::default()).unwrap();
        let t = r.trace.unwrap();
        assert!(t.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    }
}
