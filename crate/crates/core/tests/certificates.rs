use nalgebra::{DMatrix, DVector};
use stochvi::certificates::*;
use stochvi::problem::{
    AffineMap, Expr, GroundSet, IntervalMap, MovingSet, ProblemInstance, ProblemKind, RandomAffine, ScenarioMap,
    ScenarioModel,
};

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn affine_map(m: DMatrix<f64>, q: DVector<f64>) -> ScenarioMap {
    let n = q.len();
    ScenarioMap::RandomAffine(RandomAffine::with_random_rhs(m, q, DMatrix::zeros(n, 0)).unwrap())
}

fn example1_map() -> ScenarioMap {
    ScenarioMap::RandomAffine(
        RandomAffine::with_random_rhs(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            v(&[-2.0, -4.0]),
            DMatrix::identity(2, 2),
        )
        .unwrap(),
    )
}

fn two_point() -> ScenarioModel {
    ScenarioModel::two_point(vec![1.0, 1.0], vec![-1.0, -1.0])
}

fn example1() -> ProblemInstance {
    ProblemInstance::new(ProblemKind::Scp, GroundSet::orthant(2), example1_map(), two_point()).unwrap()
}

fn orthant_problem(kind: ProblemKind, map: ScenarioMap) -> ProblemInstance {
    let n = map.dim();
    ProblemInstance::new(kind, GroundSet::orthant(n), map, ScenarioModel::single(vec![])).unwrap()
}

fn example1_plan() -> RayPlan {
    let mut plan = RayPlan::default_for(&GroundSet::orthant(2), v(&[0.0, 0.0]), 3);
    plan.directions.push(v(&[1.0, 1.0]).normalize());
    plan
}

fn constant(n: usize, c: f64) -> ScenarioMap {
    ScenarioMap::Smooth(stochvi::problem::SmoothMap {
        components: vec![Expr::Const(c); n],
    })
}

#[test]
fn example1_coercive_but_not_monotone_coercive_at_origin() {
    let p = example1();
    let plan = example1_plan();
    let c = coercivity_certificate(&p, &plan).unwrap();
    assert_eq!(c.verdict, Verdict::Pass);
    assert_eq!(c.label, "sampled evidence");
    let m = monotone_coercivity_certificate(&p, &plan).unwrap();
    assert_eq!(m.verdict, Verdict::Fail);
    let w = m.witness.unwrap();
    // F(0; ω¹) = (-1, -3): both axes give negative inner products.
    assert_eq!(w.scenario, Some(0));
    assert!(w.value < 0.0);
}

#[test]
fn anti_monotone_map_fails_with_reproducible_witness() {
    let p = orthant_problem(ProblemKind::Svi, affine_map(-DMatrix::identity(2, 2), v(&[0.0, 0.0])));
    let plan = RayPlan::default_for(&p.set, v(&[0.0, 0.0]), 1);
    let r = coercivity_certificate(&p, &plan).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.unwrap();
    let d = DVector::from_vec(w.direction.unwrap());
    let step = &d * w.radius.unwrap();
    let x = &plan.x_ref + &step;
    let omega = DVector::from_vec(w.omega.unwrap());
    assert_eq!(p.eval_map(&x, &omega).unwrap().dot(&step), w.value);
    assert_eq!(x.as_slice(), w.point.unwrap().as_slice());
}

#[test]
fn cartesian_blocks() {
    let set = GroundSet::cartesian(vec![GroundSet::orthant(1), GroundSet::orthant(1)]).unwrap();
    let p = ProblemInstance::new(ProblemKind::Svi, set.clone(), example1_map(), two_point()).unwrap();
    let plan = RayPlan::default_for(&set, v(&[0.0, 0.0]), 5);
    let r = cartesian_coercivity_certificate(&p, 1, &plan, 4).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);

    let mut m = DMatrix::identity(2, 2);
    m[(1, 1)] = 0.0;
    let neg = ProblemInstance::new(
        ProblemKind::Svi,
        set.clone(),
        affine_map(m, v(&[0.0, -1.0])),
        ScenarioModel::single(vec![]),
    )
    .unwrap();
    assert_eq!(cartesian_coercivity_certificate(&neg, 0, &plan, 4).unwrap().verdict, Verdict::Pass);
    assert_eq!(cartesian_coercivity_certificate(&neg, 1, &plan, 4).unwrap().verdict, Verdict::Fail);
    assert!(cartesian_coercivity_certificate(&example1(), 0, &plan, 4).is_err());
}

#[test]
fn lower_bound_examples() {
    // min_x xᵀ(Mx + q) ≥ −‖q‖²/(4 λ_min(M)), λ_min = 1.
    let sq = |k: usize, c: f64| Expr::Pow(Box::new(Expr::Sum(vec![Expr::Const(c), Expr::Omega(k)])), 2);
    let u = Expr::Product(vec![Expr::Const(0.25), Expr::Sum(vec![sq(0, -2.0), sq(1, -4.0)])]);
    let plan = LowerBoundPlan::default_for(v(&[0.0, 0.0]), 2);
    let r = lower_bound_certificate(&example1(), &plan, &LowerBound::Explicit { u }).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let auto = lower_bound_certificate(&example1(), &plan, &LowerBound::Auto).unwrap();
    assert_eq!(auto.verdict, Verdict::Pass);

    let p = orthant_problem(ProblemKind::Svi, constant(1, -1.0));
    let plan = LowerBoundPlan::default_for(v(&[0.0]), 2);
    let r = lower_bound_certificate(&p, &plan, &LowerBound::Explicit { u: Expr::Const(1.0) }).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.witness.unwrap().point.unwrap()[0] > 1.0);
    assert_eq!(lower_bound_certificate(&p, &plan, &LowerBound::Auto).unwrap().verdict, Verdict::Fail);
}

#[test]
fn multivalued_examples() {
    let interval = |lo: f64, hi: f64| {
        ScenarioMap::IntervalValued(IntervalMap {
            lower: vec![Expr::Const(lo)],
            upper: vec![Expr::Const(hi)],
        })
    };
    let p = orthant_problem(ProblemKind::Svi, interval(-2.0, -1.0));
    let plan = RayPlan::default_for(&p.set, v(&[0.0]), 0);
    assert_eq!(multivalued_coercivity_certificate(&p, &plan).unwrap().verdict, Verdict::Fail);
    assert!(coercivity_certificate(&p, &plan).is_err());
    let single = orthant_problem(ProblemKind::Svi, interval(1.0, 1.0));
    let single_plain = orthant_problem(ProblemKind::Svi, constant(1, 1.0));
    assert_eq!(
        multivalued_coercivity_certificate(&single, &plan).unwrap().verdict,
        coercivity_certificate(&single_plain, &plan).unwrap().verdict
    );
}

fn sqvi(base: GroundSet, moving: MovingSet, map: ScenarioMap) -> ProblemInstance {
    ProblemInstance::new_sqvi(base, moving, map, ScenarioModel::single(vec![])).unwrap()
}

fn fixed(n: usize) -> MovingSet {
    MovingSet::Translated {
        shift: AffineMap::new(DMatrix::zeros(n, n), DVector::zeros(n)).unwrap(),
    }
}

#[test]
fn qvi_boundary_examples() {
    let p = sqvi(GroundSet::orthant(1), fixed(1), affine_map(DMatrix::identity(1, 1), v(&[-5.0])));
    let u = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
    let r = qvi_boundary_certificate(&p, &u, &v(&[0.5]), 16, 8, 0, 1e-6).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.witness.unwrap().point.unwrap(), vec![1.0]);
    assert!(qvi_boundary_certificate(&p, &u, &v(&[0.0]), 16, 8, 0, 1e-6).is_err());

    let strong = sqvi(GroundSet::orthant(2), fixed(2), affine_map(DMatrix::identity(2, 2), v(&[-1.0, -1.0])));
    let big = BoxRegion::new(vec![-1.0, -1.0], vec![10.0, 10.0]).unwrap();
    let r = qvi_boundary_certificate(&strong, &big, &v(&[1.0, 1.0]), 200, 8, 0, 1e-6).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);

    let outside = BoxRegion::new(vec![-3.0, -3.0], vec![-1.0, -1.0]).unwrap();
    let r = qvi_boundary_certificate(&strong, &outside, &v(&[-2.0, -2.0]), 40, 8, 0, 1e-6).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(!r.notes.is_empty());
}

#[test]
fn qvi_compactness_examples() {
    let unit = GroundSet::new_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let gamma = BoxRegion::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let map = affine_map(DMatrix::identity(2, 2), v(&[0.0, 0.0]));
    let inside = sqvi(unit.clone(), fixed(2), map.clone());
    assert_eq!(qvi_compactness_check(&inside, &gamma, 50, 1).unwrap().verdict, Verdict::Pass);

    let shifted = MovingSet::Translated {
        shift: AffineMap::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap(),
    };
    let escapes = sqvi(unit.clone(), shifted, map.clone());
    let r = qvi_compactness_check(&escapes, &gamma, 50, 1).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.unwrap();
    let other = w.other.unwrap();
    assert!(other.iter().any(|&c| c > 1.0));

    // c(x) = x/4 maps [0, 3/4]² into [0, 3/16]², so K(x) ⊆ [0, 15/16]².
    let small = GroundSet::new_box(vec![0.0, 0.0], vec![0.75, 0.75]).unwrap();
    let contract = MovingSet::Translated {
        shift: AffineMap::new(DMatrix::identity(2, 2) * 0.25, DVector::zeros(2)).unwrap(),
    };
    let ok = sqvi(small, contract, map);
    assert_eq!(qvi_compactness_check(&ok, &gamma, 50, 1).unwrap().verdict, Verdict::Pass);
}

#[test]
fn scp_growth_examples() {
    let p = example1();
    let plan = example1_plan();
    assert_eq!(
        scp_growth_certificate(&p, &plan, GrowthMode::ComponentwiseH).unwrap().verdict,
        Verdict::Pass
    );
    assert_eq!(scp_growth_certificate(&p, &plan, GrowthMode::InnerProduct).unwrap().verdict, Verdict::Pass);
    let mut m = DMatrix::identity(2, 2);
    m[(0, 0)] = 0.0;
    let neg = orthant_problem(ProblemKind::Scp, affine_map(m, v(&[-1.0, 0.0])));
    assert_eq!(
        scp_growth_certificate(&neg, &plan, GrowthMode::ComponentwiseH).unwrap().verdict,
        Verdict::Fail
    );
    let id = copositive_r0_companion(3).unwrap();
    assert_eq!(id, DMatrix::identity(3, 3));
}

#[test]
fn pair_examples() {
    let plan = PairPlan::default();
    let id = orthant_problem(ProblemKind::Scp, affine_map(DMatrix::identity(2, 2), v(&[1.0, -2.0])));
    let r = cocoercivity_certificate(&id, &plan, None).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((r.params["eta_hat"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let rotation = orthant_problem(ProblemKind::Scp, affine_map(rot, v(&[0.0, 0.0])));
    assert_eq!(cocoercivity_certificate(&rotation, &plan, None).unwrap().verdict, Verdict::Fail);
    assert_eq!(monotonicity_probe(&rotation, &plan).unwrap().verdict, Verdict::Pass);

    let r = cocoercivity_certificate(&example1(), &plan, Some(&v(&[10.0, 10.0]))).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let interior = r.evidence.iter().filter(|e| e.anchor == Some(0)).collect::<Vec<_>>();
    assert_eq!(interior.len(), 2);
    // Mu + q(ω) = (28 + ω1, 26 + ω2) with ω = ±(1, 1)
    assert_eq!(interior[0].tail_min, 27.0);
    assert_eq!(interior[1].tail_min, 25.0);

    assert_eq!(monotonicity_probe(&example1(), &plan).unwrap().verdict, Verdict::Pass);
    let anti = orthant_problem(ProblemKind::Svi, affine_map(-DMatrix::identity(2, 2), v(&[0.0, 0.0])));
    let r = monotonicity_probe(&anti, &plan).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.unwrap();
    let (x, y) = (v(&w.point.unwrap()), v(&w.other.unwrap()));
    let o = v(&[]);
    let val = (anti.eval_map(&x, &o).unwrap() - anti.eval_map(&y, &o).unwrap()).dot(&(&x - &y));
    assert_eq!(val, w.value);
}

#[test]
fn alternative_examples() {
    let plan = AlternativePlan::default();
    let r = alternative_witness_search(&example1(), &plan).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let last = r.params["trajectory"].as_array().unwrap().last().unwrap().clone();
    let x: Vec<f64> = serde_json::from_value(last).unwrap();
    assert!((v(&x) - v(&[0.0, 2.0])).norm() < 1e-6);

    let neg = orthant_problem(ProblemKind::Scp, affine_map(DMatrix::zeros(1, 1), v(&[-1.0])));
    let r = alternative_witness_search(&neg, &plan).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.unwrap();
    // x_τ = 1/τ
    assert!((w.value * w.parameter.unwrap() - 1.0).abs() < 1e-6);

    let id = orthant_problem(ProblemKind::Scp, affine_map(DMatrix::identity(1, 1), v(&[0.0])));
    let r = alternative_witness_search(&id, &plan).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.evidence[0].values.iter().all(|&n| n == 0.0));
}
