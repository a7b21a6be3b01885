use super::{
    extragradient_solve, qvi_fixed_point, ssn_fb_solve, start_point, Method, SolveResult, SolverConfig,
};
use crate::error::{Error, Result};
use crate::problem::{AveragedMap, ProblemInstance, ProblemKind};

/// Default sample size when a sampler model is solved without `samples`.
pub const DEFAULT_SAA_SAMPLES: usize = 1_000;

/// The frozen map an SAA run works with: exact weights for finite models
/// unless a sample size is configured, otherwise `N` seeded draws.
pub fn averaged_map_for(problem: &ProblemInstance, config: &SolverConfig) -> Result<AveragedMap> {
    match (config.samples, problem.scenarios.is_finite()) {
        (None, true) => AveragedMap::exact(problem),
        (None, false) => AveragedMap::sampled(problem, DEFAULT_SAA_SAMPLES, config.seed),
        (Some(n), _) => AveragedMap::sampled(problem, n, config.seed),
    }
}

/// Sample-average approximation: freeze the averaged map, then hand it to
/// extragradient (VI), semismooth Newton (complementarity kinds) or the
/// fixed-point iteration (QVI).
pub fn saa_solve(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    if problem.map.is_interval() {
        return Err(Error::IntervalValuedMap);
    }
    if problem.kind == ProblemKind::Sqvi {
        let mut r = qvi_fixed_point(problem, config)?;
        r.config.method = Method::Saa;
        return Ok(r);
    }
    let map = averaged_map_for(problem, config)?;
    let x0 = start_point(problem, config)?;
    let mut r = match problem.kind {
        ProblemKind::Scp | ProblemKind::MixedScp => {
            let comps = problem
                .set
                .cone_components()
                .expect("complementarity kinds are validated to use cones");
            ssn_fb_solve(&comps, &map, &x0, config)?
        }
        _ => extragradient_solve(&problem.set, &map, &x0, config)?,
    };
    r.config.method = Method::Saa;
    r.config.samples = match (config.samples, problem.scenarios.is_finite()) {
        (None, true) => None,
        (None, false) => Some(DEFAULT_SAA_SAMPLES),
        (s, _) => s,
    };
    r.config.seed = config.seed;
    if r.config.samples.is_none() {
        r.notes.push("exact finite-sum weights".into());
    }
    Ok(r)
}
