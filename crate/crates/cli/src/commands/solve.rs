use nalgebra::DVector;
use stochvi::io::files::ReportFile;
use stochvi::solvers::{
    averaged_map_for, erm_solve, extragradient_solve, qvi_fixed_point, sa_solve, saa_solve, ssn_fb_solve,
    SolveResult, SolveStatus, SolverConfig,
};
use stochvi::ProblemInstance;

use super::{read_json, read_problem, vector, CliError, CmdResult, Context, EXIT_DIVERGED, EXIT_MAX_ITER, EXIT_OK};
use crate::cli::{MethodArg, SolveArgs};

fn solver_config(ctx: &Context, args: &SolveArgs, dim: usize) -> Result<SolverConfig, CliError> {
    let mut c: SolverConfig = match &args.solver_config {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    c.seed = ctx.seed;
    c.tol = args.tol.or(c.tol);
    c.max_iter = args.max_iter.or(c.max_iter);
    c.step = args.step.or(c.step);
    c.samples = args.samples.or(c.samples);
    if let Some(t) = args.theta {
        c.theta = t;
    }
    if let Some(m) = args.mu0 {
        c.mu0 = m;
    }
    if let Some(k) = args.mu_stages {
        c.mu_stages = k;
    }
    if args.no_averaging {
        c.averaging = false;
    }
    if let Some(x0) = &args.x0 {
        c.x0 = Some(vector("x0", x0, dim)?);
    }
    c.record_trace |= args.trace;
    c.validate()?;
    Ok(c)
}

fn dispatch(problem: &ProblemInstance, method: MethodArg, config: &SolverConfig) -> stochvi::Result<SolveResult> {
    let deterministic = || {
        if problem.map.is_interval() {
            return Err(stochvi::Error::IntervalValuedMap);
        }
        let map = averaged_map_for(problem, config)?;
        let x0 = match &config.x0 {
            Some(x) => x.clone(),
            None => problem.set.project(&DVector::zeros(problem.dim))?,
        };
        Ok((map, x0))
    };
    match method {
        MethodArg::Saa => saa_solve(problem, config),
        MethodArg::Sa => sa_solve(problem, config),
        MethodArg::Erm => erm_solve(problem, config),
        MethodArg::QviFp => qvi_fixed_point(problem, config),
        MethodArg::Extragradient => {
            let (map, x0) = deterministic()?;
            extragradient_solve(&problem.set, &map, &x0, config)
        }
        MethodArg::Ssn => {
            let comps = problem.set.cone_components().ok_or_else(|| {
                stochvi::Error::InvalidProblem("ssn needs a set made of nonnegative and free coordinates".into())
            })?;
            let (map, x0) = deterministic()?;
            ssn_fb_solve(&comps, &map, &x0, config)
        }
    }
}

pub fn run(ctx: &Context, args: &SolveArgs) -> CmdResult {
    let file = read_problem(&args.problem)?;
    let config = solver_config(ctx, args, file.problem.dim)?;
    let result = dispatch(&file.problem, args.method, &config)?;
    let mut inputs = vec![args.problem.as_path()];
    if let Some(p) = &args.solver_config {
        inputs.push(p);
    }
    let manifest = ctx.manifest(&inputs)?;
    eprintln!(
        "{}: {:?} after {} iterations, residual {:.3e}",
        result.config.method.name(),
        result.status,
        result.iterations,
        result.residual
    );
    let code = match result.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIter => EXIT_MAX_ITER,
        SolveStatus::Diverged => EXIT_DIVERGED,
    };
    ctx.emit(&ReportFile::new("solve", manifest, result).to_text()?)?;
    Ok(code)
}
