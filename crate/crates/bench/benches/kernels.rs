use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};
use std::hint::black_box;
use stochvi::certificates::{coercivity_certificate, RayPlan};
use stochvi::lcp::{enumerate_lcp_solutions, is_copositive, lemke_solve, DEFAULT_MAX_DEPTH};
use stochvi::markets::{build_power_market, PowerNetworkConfig};
use stochvi::problem::{GroundSet, ProblemInstance, ProblemKind, RandomAffine, ScenarioMap, ScenarioModel};
use stochvi::solvers::{saa_solve, SolverConfig};
use stochvi::LcpInstance;

/// A deterministic positive definite LCP of size `n`.
fn lcp(n: usize) -> LcpInstance {
    let a = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5);
    let m = a.transpose() * &a + DMatrix::identity(n, n);
    let q = DVector::from_fn(n, |i, _| ((i * 5) % 7) as f64 - 3.0);
    LcpInstance::new(m, q).unwrap()
}

fn example1() -> ProblemInstance {
    ProblemInstance::new(
        ProblemKind::Scp,
        GroundSet::orthant(2),
        ScenarioMap::RandomAffine(
            RandomAffine::with_random_rhs(
                DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
                DVector::from_column_slice(&[-2.0, -4.0]),
                DMatrix::identity(2, 2),
            )
            .unwrap(),
        ),
        ScenarioModel::two_point(vec![1.0, 1.0], vec![-1.0, -1.0]),
    )
    .unwrap()
}

fn lcp_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("lcp");
    for n in [4, 8, 12] {
        let inst = lcp(n);
        g.bench_with_input(BenchmarkId::new("lemke", n), &inst, |b, l| b.iter(|| lemke_solve(black_box(l))));
        g.bench_with_input(BenchmarkId::new("enumerate", n), &inst, |b, l| {
            b.iter(|| enumerate_lcp_solutions(black_box(l), 1e-10))
        });
    }
    for n in [3, 5] {
        let mut m = DMatrix::identity(n, n);
        m[(0, 1)] = -0.9;
        m[(1, 0)] = -0.9;
        g.bench_with_input(BenchmarkId::new("copositive", n), &m, |b, m| {
            b.iter(|| is_copositive(black_box(m), DEFAULT_MAX_DEPTH, 1e-10))
        });
    }
    g.finish();
}

fn solvers(c: &mut Criterion) {
    let p = example1();
    c.bench_function("saa example1", |b| b.iter(|| saa_solve(black_box(&p), &SolverConfig::default())));
    let power = build_power_market(&PowerNetworkConfig::two_node_example()).unwrap();
    c.bench_function("saa power two-node", |b| {
        b.iter(|| saa_solve(black_box(&power), &SolverConfig::default()))
    });
}

fn certificates(c: &mut Criterion) {
    let p = example1();
    let plan = RayPlan::default_for(&p.set, DVector::zeros(2), 0);
    c.bench_function("coercivity example1", |b| b.iter(|| coercivity_certificate(black_box(&p), &plan)));
}

criterion_group!(benches, lcp_kernels, solvers, certificates);
criterion_main!(benches);
