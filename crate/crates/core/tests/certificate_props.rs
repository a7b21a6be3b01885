mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stochvi::certificates::*;
use stochvi::problem::map::{IntervalMap, RandomAffine};
use stochvi::problem::{Expr, GroundSet, ProblemInstance, ProblemKind, ScenarioMap};

/// Affine instances whose coercivity varies: `M0 = U + c·I` with `U`
/// uniform on [−1, 1] and `c` uniform on [−0.5, 1.5].
fn mixed_instance(r: &mut ChaCha8Rng, kind: ProblemKind) -> ProblemInstance {
    let n = r.random_range(2..=4);
    let m0 = uniform_matrix(r, n, -1.0, 1.0) + DMatrix::identity(n, n) * r.random_range(-0.5..1.5);
    let m1 = symmetric(r, n) * 0.1;
    let q0 = uniform_vector(r, n, -1.0, 1.0);
    let q = DMatrix::from_fn(n, 2, |_, _| r.random_range(-1.0..1.0));
    let map = RandomAffine::new(m0, vec![m1], q0, q).unwrap();
    let model = finite_model(r, 3, 2);
    ProblemInstance::new(kind, GroundSet::orthant(n), ScenarioMap::RandomAffine(map), model).unwrap()
}

fn affine_exprs(a: &RandomAffine) -> Vec<Expr> {
    let n = a.dim();
    (0..n)
        .map(|i| {
            let mut terms = Vec::new();
            for j in 0..n {
                terms.push(Expr::Product(vec![
                    Expr::Sum(vec![
                        Expr::Const(a.m_base[(i, j)]),
                        Expr::scaled(a.m_omega[0][(i, j)], Expr::Omega(0)),
                    ]),
                    Expr::Var(j),
                ]));
            }
            terms.push(Expr::Const(a.q_base[i]));
            for k in 0..a.q_omega.ncols() {
                terms.push(Expr::scaled(a.q_omega[(i, k)], Expr::Omega(k)));
            }
            Expr::Sum(terms)
        })
        .collect()
}

fn check_consistency(report: &CertificateReport) {
    assert_eq!(report.label, EVIDENCE_LABEL);
    match report.verdict {
        Verdict::Fail => assert!(report.witness.is_some()),
        _ => assert!(report.witness.is_none(), "{} {:?} with a witness", report.condition, report.verdict),
    }
}

#[test]
fn coercivity_witnesses_reproduce_exactly() {
    let mut r = rng(30);
    let mut fails = 0;
    for _ in 0..50 {
        let p = mixed_instance(&mut r, ProblemKind::Svi);
        let plan = RayPlan::default_for(&p.set, DVector::zeros(p.dim), 3);
        let report = coercivity_certificate(&p, &plan).unwrap();
        check_consistency(&report);
        let Some(w) = report.witness else { continue };
        fails += 1;
        let d = DVector::from_vec(w.direction.unwrap());
        let step = &d * w.radius.unwrap();
        let x = &plan.x_ref + &step;
        assert_eq!(x.as_slice(), w.point.unwrap().as_slice());
        let omega = DVector::from_vec(w.omega.unwrap());
        let g = p.eval_map(&x, &omega).unwrap().dot(&step);
        assert_eq!(g.to_bits(), w.value.to_bits());
        assert!(g <= -plan.margin);
    }
    assert!(fails >= 5, "only {fails} failing instances");
}

#[test]
fn monotonicity_witnesses_reproduce_exactly() {
    let mut r = rng(31);
    let mut fails = 0;
    for _ in 0..30 {
        let p = mixed_instance(&mut r, ProblemKind::Svi);
        let report = monotonicity_probe(&p, &PairPlan { pair_count: 100, ..Default::default() }).unwrap();
        check_consistency(&report);
        let Some(w) = report.witness else { continue };
        fails += 1;
        let x = DVector::from_vec(w.point.unwrap());
        let y = DVector::from_vec(w.other.unwrap());
        let omega = DVector::from_vec(w.omega.unwrap());
        let g = (p.eval_map(&x, &omega).unwrap() - p.eval_map(&y, &omega).unwrap()).dot(&(&x - &y));
        assert_eq!(g.to_bits(), w.value.to_bits());
        assert!(g < 0.0);
    }
    assert!(fails >= 5);
}

#[test]
fn singleton_intervals_reduce_to_coercivity() {
    let mut r = rng(32);
    let mut verdicts = Vec::new();
    for _ in 0..50 {
        let p = mixed_instance(&mut r, ProblemKind::Svi);
        let ScenarioMap::RandomAffine(a) = &p.map else { unreachable!() };
        let exprs = affine_exprs(a);
        let q = ProblemInstance::new(
            ProblemKind::Svi,
            p.set.clone(),
            ScenarioMap::IntervalValued(IntervalMap { lower: exprs.clone(), upper: exprs }),
            p.scenarios.clone(),
        )
        .unwrap();
        let plan = RayPlan::default_for(&p.set, DVector::zeros(p.dim), 5);
        let single = coercivity_certificate(&p, &plan).unwrap();
        let multi = multivalued_coercivity_certificate(&q, &plan).unwrap();
        check_consistency(&multi);
        assert_eq!(single.verdict, multi.verdict);
        verdicts.push(single.verdict);
    }
    assert!(verdicts.contains(&Verdict::Pass) && verdicts.contains(&Verdict::Fail));
}

#[test]
fn verdicts_survive_positive_scaling() {
    let mut r = rng(33);
    let mut seen = Vec::new();
    for _ in 0..30 {
        let p = mixed_instance(&mut r, ProblemKind::Scp);
        let plan = RayPlan::default_for(&p.set, DVector::zeros(p.dim), 7);
        let pairs = PairPlan { pair_count: 100, ..Default::default() };
        let base = [
            coercivity_certificate(&p, &plan).unwrap(),
            scp_growth_certificate(&p, &plan, GrowthMode::ComponentwiseH).unwrap(),
            monotonicity_probe(&p, &pairs).unwrap(),
        ];
        for c in [0.1, 10.0] {
            let pc = p.with_scaled_map(c);
            let plan_c = RayPlan { margin: plan.margin * c, ..plan.clone() };
            let pairs_c = PairPlan { margin: pairs.margin * c, ..pairs.clone() };
            let scaled = [
                coercivity_certificate(&pc, &plan_c).unwrap(),
                scp_growth_certificate(&pc, &plan_c, GrowthMode::ComponentwiseH).unwrap(),
                monotonicity_probe(&pc, &pairs_c).unwrap(),
            ];
            for (a, b) in base.iter().zip(&scaled) {
                check_consistency(b);
                assert_eq!(a.verdict, b.verdict, "{} at c = {c}", a.condition);
            }
        }
        seen.extend(base.iter().map(|b| b.verdict));
    }
    assert!(seen.contains(&Verdict::Pass) && seen.contains(&Verdict::Fail));
}

#[test]
fn tail_rule_verdicts_partition() {
    use proptest::prelude::*;
    proptest!(|(values in prop::collection::vec(-10.0f64..10.0, 3..12), margin in 0.0f64..1.0)| {
        let (verdict, tail_min, at) = tail_rule(&values, margin);
        let tail = &values[values.len() - 3..];
        let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(tail_min, min);
        prop_assert!(at >= values.len() - 3);
        let expected = if min > margin {
            Verdict::Pass
        } else if tail.iter().any(|&t| t <= -margin) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        prop_assert_eq!(verdict, expected);
        if verdict == Verdict::Fail {
            prop_assert!(values[at] <= -margin);
        }
    });
}
