use nalgebra::{DMatrix, DVector};

use super::{ConfigEcho, Method, ResidualKind, SolveResult, SolveStatus, SolverConfig, DIVERGENCE_LIMIT};
use crate::error::{check_dim, Result};
use crate::problem::{fb_system, ConeComponent, DeterministicMap};

const ARMIJO_SIGMA: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
/// Newton directions must satisfy `∇ψᵀd ≤ −DESCENT_RHO ‖d‖^2.1`.
const DESCENT_RHO: f64 = 1e-10;
const POLISH_STEPS: usize = 2;

/// An element of the generalized Jacobian of the FB system at `x`.
fn generalized_jacobian(
    components: &[ConeComponent],
    x: &DVector<f64>,
    fx: &DVector<f64>,
    jf: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for (i, c) in components.iter().enumerate() {
        match c {
            ConeComponent::Free => h.set_row(i, &jf.row(i)),
            ConeComponent::Nonneg => {
                let r = x[i].hypot(fx[i]);
                let (a, b) = if r > 0.0 {
                    (x[i] / r - 1.0, fx[i] / r - 1.0)
                } else {
                    let s = std::f64::consts::FRAC_1_SQRT_2;
                    (s - 1.0, s - 1.0)
                };
                let row = jf.row(i) * b;
                h.set_row(i, &row);
                h[(i, i)] += a;
            }
        }
    }
    h
}

/// Semismooth Newton on `Φ(x) = 0`, where `Φ` applies Fischer–Burmeister
/// to sign-constrained coordinates and keeps free coordinates' equations.
///
/// Globalized by an Armijo search on `ψ = ½‖Φ‖²`; falls back to `−∇ψ` when
/// the Newton system is singular or its solution is not a descent direction.
pub fn ssn_fb_solve(
    components: &[ConeComponent],
    map: &dyn DeterministicMap,
    x0: &DVector<f64>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    check_dim("ssn components", map.dim(), components.len())?;
    check_dim("ssn x0", map.dim(), x0.len())?;
    let tol = config.tol_for(Method::Ssn);
    let max_iter = config.max_iter_for(Method::Ssn);
    let phi = |x: &DVector<f64>| fb_system(components, x, &map.eval(x));

    let mut x = x0.clone();
    let mut fx = map.eval(&x);
    let mut res = fb_system(components, &x, &fx);
    let mut trace = config.record_trace.then(Vec::new);
    let mut status = SolveStatus::MaxIter;
    let mut iterations = max_iter;
    let mut gradient_steps = 0;
    for k in 0..=max_iter {
        let norm = res.norm();
        if let Some(t) = trace.as_mut() {
            t.push(norm);
        }
        if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
            status = SolveStatus::Diverged;
            iterations = k;
            break;
        }
        if norm <= tol {
            status = SolveStatus::Converged;
            iterations = k;
            break;
        }
        if k == max_iter {
            break;
        }
        let h = generalized_jacobian(components, &x, &fx, &map.jacobian(&x));
        let grad = h.transpose() * &res;
        let psi = 0.5 * norm * norm;
        let newton = h.clone().lu().solve(&(-&res)).filter(|d| {
            d.iter().all(|v| v.is_finite()) && grad.dot(d) <= -DESCENT_RHO * d.norm().powf(2.1)
        });
        let d = match newton {
            Some(d) => d,
            None => {
                gradient_steps += 1;
                -&grad
            }
        };
        let slope = grad.dot(&d);
        let mut t = 1.0;
        loop {
            let trial = &x + &d * t;
            let r = phi(&trial);
            if 0.5 * r.norm_squared() <= psi + ARMIJO_SIGMA * t * slope {
                x = trial;
                break;
            }
            t *= 0.5;
            if t < MIN_STEP {
                x = trial;
                break;
            }
        }
        fx = map.eval(&x);
        res = fb_system(components, &x, &fx);
    }
    if status == SolveStatus::Converged {
        // a couple of full Newton steps, kept only if they help
        for _ in 0..POLISH_STEPS {
            let h = generalized_jacobian(components, &x, &fx, &map.jacobian(&x));
            let Some(d) = h.lu().solve(&(-&res)) else { break };
            let trial = &x + d;
            let r = phi(&trial);
            if r.norm() < res.norm() {
                x = trial;
                fx = map.eval(&x);
                res = r;
            } else {
                break;
            }
        }
    }
    let mut notes = Vec::new();
    if gradient_steps > 0 {
        notes.push(format!("{gradient_steps} gradient fallback steps"));
    }
    Ok(SolveResult {
        x,
        residual: res.norm(),
        residual_kind: ResidualKind::FbSystem,
        iterations,
        status,
        objective: None,
        trace,
        config: ConfigEcho {
            method: Method::Ssn,
            tol,
            max_iter,
            seed: config.seed,
            samples: None,
            step: None,
        },
        notes,
    })
}
