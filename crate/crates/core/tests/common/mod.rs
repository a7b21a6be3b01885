#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochvi::problem::{
    GroundSet, Outcome, ProblemInstance, ProblemKind, RandomAffine, ScenarioMap, ScenarioModel,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

pub fn uniform_matrix(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.random_range(lo..hi))
}

pub fn uniform_vector(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.random_range(lo..hi))
}

/// `AᵀA + c·I + S` with `S` skew: strongly monotone with modulus ≥ c.
pub fn strongly_monotone(r: &mut ChaCha8Rng, n: usize, c: f64) -> DMatrix<f64> {
    let a = uniform_matrix(r, n, -1.0, 1.0);
    let b = uniform_matrix(r, n, -1.0, 1.0);
    a.transpose() * &a + DMatrix::identity(n, n) * c + (&b - b.transpose()) * 0.5
}

pub fn symmetric(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = uniform_matrix(r, n, -1.0, 1.0);
    (&a + a.transpose()) * 0.5
}

/// A finite model with `k` outcomes of dimension `d` and random weights.
pub fn finite_model(r: &mut ChaCha8Rng, k: usize, d: usize) -> ScenarioModel {
    let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut outcomes: Vec<Outcome> = raw
        .iter()
        .map(|w| Outcome {
            omega: (0..d).map(|_| r.random_range(-1.0..1.0)).collect(),
            prob: w / total,
        })
        .collect();
    // make the probabilities sum to one exactly
    let head: f64 = outcomes[..k - 1].iter().map(|o| o.prob).sum();
    outcomes[k - 1].prob = 1.0 - head;
    ScenarioModel::FiniteDiscrete { outcomes }
}

/// `F(x;ω) = (M0 + ω0 M1) x + q0 + Q ω` with `M0` strongly monotone and a
/// small symmetric `M1`, over `set`.
pub fn random_affine_problem(r: &mut ChaCha8Rng, kind: ProblemKind, set: GroundSet, outcomes: usize) -> ProblemInstance {
    let n = set.dim();
    let d = 2;
    let m0 = strongly_monotone(r, n, 0.5);
    let m1 = symmetric(r, n) * 0.1;
    let q0 = uniform_vector(r, n, -2.0, 2.0);
    let q = DMatrix::from_fn(n, d, |_, _| r.random_range(-1.0..1.0));
    let map = RandomAffine::new(m0, vec![m1], q0, q).unwrap();
    let model = finite_model(r, outcomes, d);
    ProblemInstance::new(kind, set, ScenarioMap::RandomAffine(map), model).unwrap()
}

/// A random box with some infinite sides.
pub fn random_set(r: &mut ChaCha8Rng, n: usize) -> GroundSet {
    match r.random_range(0..4) {
        0 => GroundSet::orthant(n),
        1 => GroundSet::mixed(n / 2 + 1, n - n / 2 - 1),
        2 => {
            let lower: Vec<f64> = (0..n)
                .map(|_| if r.random_bool(0.3) { f64::NEG_INFINITY } else { r.random_range(-2.0..0.0) })
                .collect();
            let upper: Vec<f64> = (0..n)
                .map(|_| if r.random_bool(0.3) { f64::INFINITY } else { r.random_range(0.0..2.0) })
                .collect();
            GroundSet::new_box(lower, upper).unwrap()
        }
        _ => {
            let k = n / 2 + 1;
            GroundSet::cartesian(vec![
                GroundSet::orthant(k),
                GroundSet::new_box(vec![-1.0; n - k], vec![1.0; n - k]).unwrap(),
            ])
            .unwrap()
        }
    }
}
