use super::{
    averaged_or_error, extragradient_solve, start_point, ConfigEcho, Method, ResidualKind, SolveResult,
    SolveStatus, SolverConfig,
};
use crate::error::{Error, Result};
use crate::problem::{natural_residual, DeterministicMap, ProblemInstance};

const INNER_MAX_ITER: usize = 100_000;

/// Fixed-point iteration for a QVI with a moving set:
/// `x_{k+1}` solves `VI(K(x_k), F̄)`, stopping when `‖x_{k+1} − x_k‖ ≤ tol`.
///
/// Convergence relies on the set parametrization being contractive; a
/// Lipschitz constant ≥ 1 is flagged in the notes, and failure to converge
/// is reported through the status rather than as an error.
pub fn qvi_fixed_point(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let Some(moving) = &problem.moving_set else {
        return Err(Error::InvalidProblem("qvi-fp requires an SQVI with a moving set".into()));
    };
    let tol = config.tol_for(Method::QviFp);
    let max_iter = config.max_iter_for(Method::QviFp);
    let map = averaged_or_error(problem, config)?;
    let mut notes = Vec::new();
    let lip = moving.lipschitz();
    if lip >= 1.0 {
        notes.push(format!(
            "moving-set map is not contractive (Lipschitz constant {lip:.6}); convergence is not guaranteed"
        ));
    }
    let inner = SolverConfig {
        tol: Some(tol * 1e-2),
        max_iter: Some(INNER_MAX_ITER),
        x0: None,
        record_trace: false,
        ..config.clone()
    };
    let mut x = start_point(problem, config)?;
    let mut trace = config.record_trace.then(Vec::new);
    let mut status = SolveStatus::MaxIter;
    let mut step = f64::INFINITY;
    let mut iterations = max_iter;
    for k in 0..max_iter {
        let set = problem.feasible_set_at(&x)?;
        let r = extragradient_solve(&set, &map, &x, &inner)?;
        if r.status == SolveStatus::Diverged {
            status = SolveStatus::Diverged;
            iterations = k + 1;
            x = r.x;
            break;
        }
        step = (&r.x - &x).norm();
        x = r.x;
        if let Some(t) = trace.as_mut() {
            t.push(step);
        }
        if step <= tol {
            status = SolveStatus::Converged;
            iterations = k + 1;
            break;
        }
    }
    if let Ok(set) = problem.feasible_set_at(&x) {
        let nat = natural_residual(&set, &x, &map.eval(&x))?;
        notes.push(format!("natural residual w.r.t. K(x): {nat:e}"));
    }
    Ok(SolveResult {
        x,
        residual: step,
        residual_kind: ResidualKind::FixedPointStep,
        iterations,
        status,
        objective: None,
        trace,
        config: ConfigEcho {
            method: Method::QviFp,
            tol,
            max_iter,
            seed: config.seed,
            samples: config.samples,
            step: None,
        },
        notes,
    })
}
