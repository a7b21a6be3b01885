use nalgebra::DVector;
use stochvi::certificates::*;
use stochvi::markets::*;
use stochvi::problem::{ConeComponent, DeterministicMap, ProblemKind};
use stochvi::solvers::{saa_solve, ssn_fb_solve, SolveStatus, SolverConfig};
use stochvi::AveragedMap;

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

#[test]
fn cournot_default_equilibrium() {
    let inst = build_cournot(&CournotConfig::two_firm_default()).unwrap();
    let r = saa_solve(&inst.smoothed, &SolverConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    // 2x₁ + X = 22, 2x₂ + X = 21 on the second price segment
    assert!((r.x - v(&[5.625, 5.125])).norm() < 1e-6);
}

#[test]
fn monopoly_cournot_first_order_condition() {
    let cfg = CournotConfig {
        gamma: vec![0.0],
        delta: vec![2.0],
        breakpoints: vec![],
        intercept: stochvi::problem::OmegaAffine::constant(10.0),
        slopes: vec![stochvi::problem::OmegaAffine::constant(0.5)],
        capacities: None,
        shared_capacity: None,
        smoothing: 0.0,
        scenarios: stochvi::ScenarioModel::single(vec![]),
    };
    let inst = build_cournot(&cfg).unwrap();
    let r = saa_solve(&inst.smoothed, &SolverConfig::default()).unwrap();
    assert!((r.x[0] - 8.0).abs() < 1e-7, "{}", r.x[0]);
}

#[test]
fn smoothing_only_changes_the_windows() {
    let mut cfg = CournotConfig::two_firm_default();
    let sharp = build_cournot(&cfg).unwrap().smoothed;
    cfg.smoothing = 0.25;
    let smooth = build_cournot(&cfg).unwrap().smoothed;
    for omega in [v(&[1.0, 1.0]), v(&[-1.0, -1.0])] {
        for x in [v(&[1.0, 2.0]), v(&[4.0, 4.0]), v(&[2.9, 2.8])] {
            assert_eq!(sharp.eval_map(&x, &omega).unwrap(), smooth.eval_map(&x, &omega).unwrap());
        }
        // inside the window the blend stays within C·ε of the sharp map
        let x = v(&[3.0, 3.05]);
        let d = (sharp.eval_map(&x, &omega).unwrap() - smooth.eval_map(&x, &omega).unwrap()).amax();
        assert!(d > 0.0 && d <= 10.0 * 0.25, "{d}");
    }
}

/// Second differences of `f_i(x) = c_i(x_i) − x_i p(X;ω)` in `x_i` with step
/// `h`, at `x_i = t` for `t` on a grid, rival output fixed.
fn own_second_differences(cfg: &CournotConfig, i: usize, other: f64, omega: &[f64]) -> Vec<(f64, f64)> {
    let h = 0.05;
    let f = |xi: f64| {
        0.5 * cfg.gamma[i] * xi * xi + cfg.delta[i] * xi - xi * cfg.price(xi + other, omega)
    };
    (1..200)
        .map(|k| {
            let t = k as f64 * 0.1 + 0.013;
            (t, f(t - h) - 2.0 * f(t) + f(t + h))
        })
        .collect()
}

#[test]
fn firm_cost_convex_within_segments() {
    let cfg = CournotConfig::two_firm_default();
    for omega in [[1.0, 1.0], [-1.0, -1.0]] {
        for (i, other) in [(0, 2.5), (1, 4.0)] {
            for (t, d2) in own_second_differences(&cfg, i, other, &omega) {
                let straddles = cfg.breakpoints.iter().any(|b| (t + other - b).abs() < 0.05);
                if !straddles {
                    assert!(d2 >= -1e-8, "{d2} at t={t}");
                }
            }
        }
    }
}

#[test]
fn firm_cost_convexity_across_kinks_needs_a_concave_price() {
    // A convex kink of p (slopes rising) gives x_i p(X) a convex kink, so
    // f_i is locally concave there.
    let convex = CournotConfig::two_firm_default();
    let worst = own_second_differences(&convex, 0, 2.5, &[1.0, 1.0])
        .into_iter()
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min);
    assert!(worst < -1e-3);

    let concave = CournotConfig {
        slopes: vec![
            stochvi::problem::OmegaAffine::new(1.0, vec![0.1]),
            stochvi::problem::OmegaAffine::new(2.0, vec![0.2]),
        ],
        ..convex
    };
    concave.validate().unwrap();
    for omega in [[1.0, 1.0], [-1.0, -1.0]] {
        for (i, other) in [(0, 2.5), (1, 4.0)] {
            for (t, d2) in own_second_differences(&concave, i, other, &omega) {
                assert!(d2 >= -1e-8, "{d2} at t={t}");
            }
        }
    }
}

#[test]
fn cournot_growth_and_multivalued_coercivity() {
    let cfg = CournotConfig::two_firm_default();
    let dir = v(&[1.0, 1.0]);
    let radii = geometric_radii(1.0, 12);
    let r = cournot_growth_probe(&cfg, &v(&[0.0, 0.0]), &dir, &radii, 10.0, 0).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.evidence.iter().all(|e| e.tail_slope == Some(1)));

    // leading term b^s·r·‖d‖²: doubling r roughly doubles the quotient
    let r = cournot_growth_probe(&cfg, &v(&[0.0, 0.0]), &dir, &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0], 0.0, 0).unwrap();
    for e in &r.evidence {
        let q = &e.values;
        let n = q.len();
        let ratio = (q[n - 1] - q[n - 2]) / (q[n - 2] - q[n - 3]);
        assert!((ratio - 2.0).abs() < 0.05, "{q:?}");
    }

    let inst = build_cournot(&cfg).unwrap();
    let plan = RayPlan::default_for(&inst.interval.set, v(&[0.0, 0.0]), 0);
    let r = multivalued_coercivity_certificate(&inst.interval, &plan).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn price_continuity_and_clarke_consistency() {
    let cfg = CournotConfig {
        breakpoints: vec![3.0, 7.0],
        slopes: vec![
            stochvi::problem::OmegaAffine::new(3.0, vec![0.3]),
            stochvi::problem::OmegaAffine::new(2.0, vec![0.1]),
            stochvi::problem::OmegaAffine::new(0.5, vec![0.05]),
        ],
        ..CournotConfig::two_firm_default()
    };
    cfg.validate().unwrap();
    for omega in [[1.0, 1.0], [-1.0, -1.0], [0.3, -0.7]] {
        for &b in &cfg.breakpoints {
            assert!((cfg.price(b - 1e-13, &omega) - cfg.price(b + 1e-13, &omega)).abs() <= 1e-9);
        }
        for t in [1.0, 5.0, 9.5] {
            let (lo, hi) = price_clarke_interval(&cfg, t, &omega).unwrap();
            assert_eq!(lo, hi);
            let fd = (cfg.price(t + 1e-6, &omega) - cfg.price(t - 1e-6, &omega)) / 2e-6;
            assert!((fd - lo).abs() <= 1e-6 * (1.0 + lo.abs()));
        }
    }
}

#[test]
fn power_monopoly_solved_by_ssn() {
    let p = build_power_market(&PowerNetworkConfig::monopoly_example()).unwrap();
    let comps = p.set.cone_components().unwrap();
    let map = AveragedMap::exact(&p).unwrap();
    let r = ssn_fb_solve(&comps, &map, &DVector::zeros(p.dim), &SolverConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    assert!((r.x.rows(0, 2) - v(&[4.0, 4.0])).norm() < 1e-7);
    assert!(verify_equilibrium(&p, &r.x, 1e-7).unwrap().ok);
}

#[test]
fn power_zero_capacity_forces_zero_trade() {
    let mut cfg = PowerNetworkConfig::two_node_example();
    for row in &mut cfg.capacity {
        row.fill(0.0);
    }
    let p = build_power_market(&cfg).unwrap();
    let r = saa_solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    let l = cfg.layout();
    for f in 0..l.firms {
        for i in 0..l.nodes {
            assert!(r.x[l.g(f, i)].abs() < 1e-7 && r.x[l.s(f, i)].abs() < 1e-7);
        }
    }
    assert_eq!(power_market_u_bound(&cfg, &[1.0]), 0.0);
    for x in sample_feasible_points(&cfg, 200, 1) {
        for omega in [v(&[1.0]), v(&[-1.0])] {
            let n = l.nonneg_dim();
            let mut y = x.clone();
            y.rows_mut(n, l.firms).fill(0.0);
            assert!(y.dot(&p.eval_map(&y, &omega).unwrap()) >= -1e-9);
        }
    }
}

#[test]
fn power_two_node_fixture() {
    let cfg = PowerNetworkConfig::two_node_example();
    let p = build_power_market(&cfg).unwrap();
    assert_eq!(p.kind, ProblemKind::MixedScp);
    let comps = p.set.cone_components().unwrap();
    assert_eq!(comps.iter().filter(|c| **c == ConeComponent::Free).count(), 2);
    let map = AveragedMap::exact(&p).unwrap();
    let r = ssn_fb_solve(&comps, &map, &DVector::zeros(p.dim), &SolverConfig::default()).unwrap();
    assert!(r.residual <= 1e-6, "{}", r.residual);
    let rep = verify_equilibrium(&p, &r.x, 1e-6).unwrap();
    assert!(rep.ok, "{rep:?}");
    let fixture: Vec<f64> =
        serde_json::from_str(include_str!("../../../fixtures/power_two_node.solution.json")).unwrap();
    assert!((r.x.clone() - DVector::from_vec(fixture)).amax() < 1e-6);
}

#[test]
fn power_assembly_is_affine_with_matching_jacobian() {
    let cfg = PowerNetworkConfig::random(3, 2, 2, 4);
    let p = build_power_market(&cfg).unwrap();
    let omega = v(&[0.5]);
    let x = sample_feasible_points(&cfg, 1, 9).remove(0);
    let j = p.map.jacobian(&x, &omega).unwrap();
    let f0 = p.eval_map(&x, &omega).unwrap();
    for c in 0..p.dim {
        let mut y = x.clone();
        y[c] += 1e-3;
        let fd = (p.eval_map(&y, &omega).unwrap() - &f0) / 1e-3;
        assert!((fd - j.column(c)).amax() <= 1e-6);
    }
}

#[test]
fn power_sales_bound_on_random_networks() {
    for seed in 0..5 {
        let cfg = PowerNetworkConfig::random(2 + seed as usize % 2, 2, 1 + seed as usize % 3, seed);
        let p = build_power_market(&cfg).unwrap();
        let l = cfg.layout();
        for x in sample_feasible_points(&cfg, 1000, seed) {
            for omega in [v(&[1.0]), v(&[-1.0])] {
                let mut y = x.clone();
                y.rows_mut(l.nonneg_dim(), l.firms).fill(0.0);
                let g = y.dot(&p.eval_map(&y, &omega).unwrap());
                assert!(g >= -power_market_u_bound(&cfg, omega.as_slice()) - 1e-9);
            }
        }
    }
}

#[test]
fn power_certificates() {
    let cfg = PowerNetworkConfig::two_node_example();
    let p = build_power_market(&cfg).unwrap();
    let l = cfg.layout();
    let points = sample_feasible_points(&cfg, 500, 3)
        .into_iter()
        .map(|mut x| {
            x.rows_mut(l.nonneg_dim(), l.firms).fill(0.0);
            x.as_slice().to_vec()
        })
        .collect();
    let plan = LowerBoundPlan {
        region: SampleRegion::Points { points },
        ..LowerBoundPlan::default_for(DVector::zeros(p.dim), 0)
    };
    let u = power_market_u_expr(&cfg);
    assert_eq!(u.eval(&[], &[1.0]), power_market_u_bound(&cfg, &[1.0]));
    let r = lower_bound_certificate(&p, &plan, &LowerBound::Explicit { u }).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);

    let plan = RayPlan::default_for(&p.set, DVector::zeros(p.dim), 0);
    let r = scp_growth_certificate(&p, &plan, GrowthMode::InnerProduct).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn expected_map_of_default_cournot_is_mean_parameter_map() {
    let inst = build_cournot(&CournotConfig::two_firm_default()).unwrap();
    let avg = AveragedMap::exact(&inst.smoothed).unwrap();
    // X = 10: p = 24 − X = 14; F_1 = x1 + 2 − 14 + x1, F_2 = x2 + 3 − 14 + x2
    let f = avg.eval(&v(&[4.0, 6.0]));
    assert!((f - v(&[-4.0, 1.0])).norm() < 1e-12);
}
