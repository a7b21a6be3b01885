use nalgebra::DVector;

use super::{start_point, ConfigEcho, Method, ResidualKind, SolveResult, SolveStatus, SolverConfig, DIVERGENCE_LIMIT};
use crate::error::{Error, Result};
use crate::problem::scenario::sample_with;
use crate::problem::{natural_residual, AveragedMap, DeterministicMap, ProblemInstance};
use crate::rng;

/// Projected stochastic approximation `x_{k+1} = Π(x_k − (θ/k) F(x_k; ω_k))`
/// with one fresh scenario per iteration.
///
/// With averaging on (the default) the result is the mean of the second
/// half of the iterates. The residual is measured against a high-accuracy
/// expected map (exact for finite models).
pub fn sa_solve(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    if problem.map.is_interval() {
        return Err(Error::IntervalValuedMap);
    }
    let tol = config.tol_for(Method::Sa);
    let max_iter = config.max_iter_for(Method::Sa);
    let mut rng = rng::stream(config.seed, rng::STREAM_SA);
    let mut x = problem.set.project(&start_point(problem, config)?)?;
    let tail_start = max_iter / 2 + 1;
    let mut sum = DVector::zeros(problem.dim);
    let mut count = 0usize;
    let mut diverged = false;
    let mut trace = config.record_trace.then(Vec::new);
    let mut iterations = max_iter;
    for k in 1..=max_iter {
        let omega = sample_with(&problem.scenarios, 1, &mut rng).remove(0);
        let f = problem.map.eval(&x, &omega)?;
        let gamma = config.theta / k as f64;
        x = problem.set.project(&(&x - f * gamma))?;
        if !x.iter().all(|v| v.is_finite()) || x.amax() > DIVERGENCE_LIMIT {
            diverged = true;
            iterations = k;
            break;
        }
        if k >= tail_start {
            sum += &x;
            count += 1;
        }
        if let Some(t) = trace.as_mut() {
            t.push(x.norm());
        }
    }
    let reference = AveragedMap::reference(problem, config.seed)?;
    let x_out = if config.averaging && count > 0 && !diverged {
        sum / count as f64
    } else {
        x
    };
    let residual = if diverged {
        f64::INFINITY
    } else {
        natural_residual(&problem.set, &x_out, &reference.eval(&x_out))?
    };
    let status = if diverged {
        SolveStatus::Diverged
    } else if residual <= tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok(SolveResult {
        x: x_out,
        residual,
        residual_kind: ResidualKind::Natural,
        iterations,
        status,
        objective: None,
        trace,
        config: ConfigEcho {
            method: Method::Sa,
            tol,
            max_iter,
            seed: config.seed,
            samples: None,
            step: Some(config.theta),
        },
        notes: vec![if config.averaging {
            "tail-averaged iterate (second half)".into()
        } else {
            "last iterate".into()
        }],
    })
}
