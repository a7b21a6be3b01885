use std::path::Path;

use nalgebra::DVector;
use serde::de::DeserializeOwned;
use stochvi::certificates::*;
use stochvi::io::files::ReportFile;
use stochvi::ProblemInstance;

use super::{
    read_json, read_problem, vector, CliError, CmdResult, Context, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_OK,
};
use crate::cli::{CertifyArgs, Condition, GrowthArg};

const DEFAULT_BOUNDARY_SAMPLES: usize = 256;

fn x_ref(args: &CertifyArgs, problem: &ProblemInstance) -> Result<DVector<f64>, CliError> {
    match &args.xref {
        Some(x) => vector("xref", x, problem.dim),
        None => Ok(problem.set.project(&DVector::zeros(problem.dim))?),
    }
}

fn plan_file<T: DeserializeOwned>(path: Option<&Path>) -> Result<Option<T>, CliError> {
    path.map(read_json).transpose()
}

fn ray_plan(ctx: &Context, args: &CertifyArgs, problem: &ProblemInstance) -> Result<RayPlan, CliError> {
    let mut plan = match plan_file::<RayPlan>(args.plan.as_deref())? {
        Some(p) => p,
        None => RayPlan::default_for(&problem.set, x_ref(args, problem)?, ctx.seed),
    };
    if args.xref.is_some() {
        plan.x_ref = x_ref(args, problem)?;
    }
    if let Some(r) = &args.radii {
        plan.radii = r.clone();
    }
    if let Some(s) = args.scenarios {
        plan.scenario_draws = s;
    }
    if let Some(m) = args.margin {
        plan.margin = m;
    }
    plan.seed = ctx.seed;
    Ok(plan)
}

fn pair_plan(ctx: &Context, args: &CertifyArgs) -> Result<PairPlan, CliError> {
    let mut plan = plan_file::<PairPlan>(args.plan.as_deref())?.unwrap_or_default();
    if let Some(n) = args.samples {
        plan.pair_count = n;
    }
    if let Some(s) = args.scenarios {
        plan.scenario_draws = s;
    }
    if let Some(m) = args.margin {
        plan.margin = m;
    }
    plan.seed = ctx.seed;
    Ok(plan)
}

fn box_region(args: &CertifyArgs) -> Result<BoxRegion, CliError> {
    match (&args.lower, &args.upper) {
        (Some(l), Some(u)) => Ok(BoxRegion::new(l.clone(), u.clone())?),
        _ => Err(CliError("this condition needs --lower and --upper".into())),
    }
}

fn certify(ctx: &Context, args: &CertifyArgs, problem: &ProblemInstance) -> Result<CertificateReport, CliError> {
    let report = match args.condition {
        Condition::Coercivity => coercivity_certificate(problem, &ray_plan(ctx, args, problem)?)?,
        Condition::MonotoneCoercivity => monotone_coercivity_certificate(problem, &ray_plan(ctx, args, problem)?)?,
        Condition::Multivalued => multivalued_coercivity_certificate(problem, &ray_plan(ctx, args, problem)?)?,
        Condition::Cartesian => {
            cartesian_coercivity_certificate(problem, args.block, &ray_plan(ctx, args, problem)?, args.anchors)?
        }
        Condition::ScpGrowth => {
            let mode = match args.growth {
                GrowthArg::Componentwise => GrowthMode::ComponentwiseH,
                GrowthArg::InnerProduct => GrowthMode::InnerProduct,
            };
            scp_growth_certificate(problem, &ray_plan(ctx, args, problem)?, mode)?
        }
        Condition::LowerBound => {
            let mut plan = match plan_file::<LowerBoundPlan>(args.plan.as_deref())? {
                Some(p) => p,
                None => LowerBoundPlan::default_for(x_ref(args, problem)?, ctx.seed),
            };
            if args.xref.is_some() {
                plan.x_ref = x_ref(args, problem)?;
            }
            if let (Some(r), SampleRegion::Expanding { radii, .. }) = (&args.radii, &mut plan.region) {
                *radii = r.clone();
            }
            if let Some(s) = args.scenarios {
                plan.scenario_draws = s;
            }
            if let Some(m) = args.margin {
                plan.margin = m;
            }
            plan.seed = ctx.seed;
            let bound = match &args.bound {
                Some(p) => read_json(p)?,
                None => LowerBound::Auto,
            };
            lower_bound_certificate(problem, &plan, &bound)?
        }
        Condition::QviBoundary => qvi_boundary_certificate(
            problem,
            &box_region(args)?,
            &x_ref(args, problem)?,
            args.samples.unwrap_or(DEFAULT_BOUNDARY_SAMPLES),
            args.scenarios.unwrap_or(DEFAULT_SCENARIO_DRAWS),
            ctx.seed,
            args.margin.unwrap_or(DEFAULT_MARGIN),
        )?,
        Condition::QviCompact => qvi_compactness_check(
            problem,
            &box_region(args)?,
            args.samples.unwrap_or(DEFAULT_BOUNDARY_SAMPLES),
            ctx.seed,
        )?,
        Condition::Monotone => monotonicity_probe(problem, &pair_plan(ctx, args)?)?,
        Condition::Cocoercive => {
            let candidate = match &args.candidate {
                Some(u) => Some(vector("candidate", u, problem.dim)?),
                None => None,
            };
            cocoercivity_certificate(problem, &pair_plan(ctx, args)?, candidate.as_ref())?
        }
        Condition::Alternative => {
            let mut plan = plan_file::<AlternativePlan>(args.plan.as_deref())?.unwrap_or_default();
            if let Some(r) = args.radii.as_ref().and_then(|r| r.last()) {
                plan.max_radius = *r;
            }
            plan.samples = args.samples.or(plan.samples);
            plan.seed = ctx.seed;
            alternative_witness_search(problem, &plan)?
        }
    };
    Ok(report)
}

pub fn run(ctx: &Context, args: &CertifyArgs) -> CmdResult {
    let file = read_problem(&args.problem)?;
    let report = certify(ctx, args, &file.problem)?;
    let mut inputs = vec![args.problem.as_path()];
    inputs.extend(args.plan.as_deref());
    inputs.extend(args.bound.as_deref());
    let manifest = ctx.manifest(&inputs)?;
    let verdict = serde_json::to_value(report.verdict).expect("verdicts serialize");
    eprintln!("{}: {} ({})", report.condition, verdict.as_str().unwrap_or("?"), report.label);
    if let Some(w) = &report.witness {
        eprintln!("witness: {}", serde_json::to_string(w).expect("witnesses serialize"));
    }
    let code = match report.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    ctx.emit(&ReportFile::new("certificate", manifest, report).to_text()?)?;
    Ok(code)
}
