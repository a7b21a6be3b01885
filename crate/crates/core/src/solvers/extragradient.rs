use nalgebra::DVector;

use super::{ConfigEcho, Method, ResidualKind, SolveResult, SolveStatus, SolverConfig, DIVERGENCE_LIMIT};
use crate::error::{check_dim, Result};
use crate::problem::{natural_residual, DeterministicMap, GroundSet};

const POWER_ITERATIONS: usize = 200;
/// Backtracking target: `τ‖F(x) − F(y)‖ ≤ BACKTRACK_RATIO · ‖x − y‖`.
const BACKTRACK_RATIO: f64 = 0.9;

/// Power-iteration estimate of `‖J‖₂` at `x`.
pub fn lipschitz_estimate(map: &dyn DeterministicMap, x: &DVector<f64>) -> f64 {
    let j = map.jacobian(x);
    let n = j.ncols();
    if n == 0 {
        return 0.0;
    }
    let jtj = j.transpose() * &j;
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = &jtj * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w / norm;
    }
    lambda.sqrt()
}

/// Korpelevich's extragradient method on `VI(K, F)`:
/// `y = Π(x − τF(x))`, `x⁺ = Π(x − τF(y))`.
///
/// `τ` starts at `0.9 / L̂` (or the configured step) and is halved whenever
/// `τ‖F(x) − F(y)‖ > 0.9‖x − y‖`, so it never increases.
pub fn extragradient_solve(
    set: &GroundSet,
    map: &dyn DeterministicMap,
    x0: &DVector<f64>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    check_dim("extragradient map", set.dim(), map.dim())?;
    check_dim("extragradient x0", set.dim(), x0.len())?;
    let tol = config.tol_for(Method::Extragradient);
    let max_iter = config.max_iter_for(Method::Extragradient);
    let mut tau = match config.step {
        Some(s) => s,
        None => {
            let l = lipschitz_estimate(map, x0);
            if l > 0.0 {
                BACKTRACK_RATIO / l
            } else {
                1.0
            }
        }
    };
    let initial_step = tau;
    let mut x = set.project(x0)?;
    let mut trace = config.record_trace.then(Vec::new);
    let mut status = SolveStatus::MaxIter;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..=max_iter {
        let fx = map.eval(&x);
        residual = natural_residual(set, &x, &fx)?;
        if let Some(t) = trace.as_mut() {
            t.push(residual);
        }
        if !residual.is_finite() || residual > DIVERGENCE_LIMIT {
            status = SolveStatus::Diverged;
            iterations = k;
            break;
        }
        if residual <= tol {
            status = SolveStatus::Converged;
            iterations = k;
            break;
        }
        if k == max_iter {
            iterations = k;
            break;
        }
        let fy = loop {
            let y = set.project(&(&x - &fx * tau))?;
            let fy = map.eval(&y);
            let dx = (&x - &y).norm();
            if tau * (&fx - &fy).norm() <= BACKTRACK_RATIO * dx || tau < 1e-14 {
                break fy;
            }
            tau *= 0.5;
        };
        x = set.project(&(&x - &fy * tau))?;
    }
    Ok(SolveResult {
        x,
        residual,
        residual_kind: ResidualKind::Natural,
        iterations,
        status,
        objective: None,
        trace,
        config: ConfigEcho {
            method: Method::Extragradient,
            tol,
            max_iter,
            seed: config.seed,
            samples: None,
            step: Some(initial_step),
        },
        notes: if tau < initial_step {
            vec![format!("step reduced to {tau:e} by backtracking")]
        } else {
            Vec::new()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{AveragedMap, FnMap};
    use nalgebra::DMatrix;

    #[test]
    fn example_one_reduction() {
        let map = AveragedMap::affine(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            DVector::from_column_slice(&[-2.0, -4.0]),
        );
        let r = extragradient_solve(
            &GroundSet::orthant(2),
            &map,
            &DVector::from_element(2, 1.0),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.x - DVector::from_column_slice(&[0.0, 2.0])).norm() <= 1e-8);
    }

    #[test]
    fn shifted_identity() {
        let a = DVector::from_column_slice(&[1.0, 0.0, 2.5]);
        let a2 = a.clone();
        let map = FnMap::new(3, move |x: &DVector<f64>| x - &a2);
        let r = extragradient_solve(&GroundSet::orthant(3), &map, &DVector::zeros(3), &SolverConfig::default())
            .unwrap();
        assert!((r.x - a).norm() <= 1e-8);
    }

    #[test]
    fn diverges_on_expanding_map() {
        // F(x) = -x on a box-free line: residual grows without bound
        let map = FnMap::new(1, |x: &DVector<f64>| -x * 1.0);
        let set = GroundSet::new_box(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).unwrap();
        let cfg = SolverConfig {
            step: Some(1.0),
            ..SolverConfig::default()
        };
        let r = extragradient_solve(&set, &map, &DVector::from_element(1, 1.0), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Diverged);
    }
}
