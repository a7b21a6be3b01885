//! Lemke's complementary pivoting with covering vector `d = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{submatrix, LcpInstance};
use crate::error::{Error, Result};
use crate::io::serde_helpers;

const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LemkeOutcome {
    Solution {
        #[serde(with = "serde_helpers::vector")]
        x: DVector<f64>,
        pivots: usize,
    },
    /// The entering column has no positive entry. Lemke's method does not
    /// apply; this says nothing about solvability in general.
    RayTermination { pivots: usize },
}

impl LemkeOutcome {
    pub fn solution(&self) -> Option<&DVector<f64>> {
        match self {
            LemkeOutcome::Solution { x, .. } => Some(x),
            LemkeOutcome::RayTermination { .. } => None,
        }
    }
}

/// Variable labels in the tableau `w − Mz − d z0 = q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    W(usize),
    Z(usize),
    Z0,
}

impl Var {
    fn column(self, n: usize) -> usize {
        match self {
            Var::W(i) => i,
            Var::Z(i) => n + i,
            Var::Z0 => 2 * n,
        }
    }

    fn complement(self) -> Var {
        match self {
            Var::W(i) => Var::Z(i),
            Var::Z(i) => Var::W(i),
            Var::Z0 => Var::Z0,
        }
    }
}

/// Solves `LCP(q, M)` by Lemke's method.
///
/// Ties in the ratio test are broken lexicographically on the rows of
/// `[q | B⁻¹]`, which rules out cycling and fixes the pivot path. When the
/// artificial variable can leave at the minimum ratio it does.
pub fn lemke_solve(lcp: &LcpInstance) -> Result<LemkeOutcome> {
    lcp.validate()?;
    let n = lcp.dim();
    if n == 0 {
        return Err(Error::InvalidProblem("LCP of dimension 0".into()));
    }
    if lcp.q.iter().all(|&v| v >= 0.0) {
        return Ok(LemkeOutcome::Solution {
            x: DVector::zeros(n),
            pivots: 0,
        });
    }
    // columns: w (n) | z (n) | z0 | rhs
    let rhs = 2 * n + 1;
    let mut t = DMatrix::<f64>::zeros(n, 2 * n + 2);
    for i in 0..n {
        t[(i, i)] = 1.0;
        for j in 0..n {
            t[(i, n + j)] = -lcp.m[(i, j)];
        }
        t[(i, 2 * n)] = -1.0;
        t[(i, rhs)] = lcp.q[i];
    }
    let mut basis: Vec<Var> = (0..n).map(Var::W).collect();

    // First pivot: z0 enters at the most negative q (ratio test against d).
    let ones = DVector::from_element(n, 1.0);
    let r = lex_min_row(&t, &(0..n).collect::<Vec<_>>(), &ones, n, |i| t[(i, rhs)]);
    pivot(&mut t, r, 2 * n);
    let mut entering = basis[r].complement();
    basis[r] = Var::Z0;

    let max_pivots = 200 * n + 1000;
    let mut pivots = 1;
    loop {
        if pivots > max_pivots {
            return Err(Error::Solver(format!("Lemke exceeded {max_pivots} pivots")));
        }
        let col = entering.column(n);
        let a = t.column(col).clone_owned();
        let rows: Vec<usize> = (0..n).filter(|&i| a[i] > PIVOT_TOL).collect();
        if rows.is_empty() {
            return Ok(LemkeOutcome::RayTermination { pivots });
        }
        let min_ratio = rows
            .iter()
            .map(|&i| t[(i, rhs)] / a[i])
            .fold(f64::INFINITY, f64::min);
        let z0_row = rows
            .iter()
            .copied()
            .find(|&i| basis[i] == Var::Z0 && t[(i, rhs)] / a[i] <= min_ratio + 1e-13);
        let r = match z0_row {
            Some(i) => i,
            None => lex_min_row(&t, &rows, &a, n, |i| t[(i, rhs)]),
        };
        pivot(&mut t, r, col);
        pivots += 1;
        let leaving = basis[r];
        basis[r] = entering;
        if leaving == Var::Z0 {
            break;
        }
        entering = leaving.complement();
    }

    let mut x = DVector::zeros(n);
    for (i, v) in basis.iter().enumerate() {
        if let Var::Z(j) = v {
            x[*j] = t[(i, rhs)].max(0.0);
        }
    }
    Ok(LemkeOutcome::Solution {
        x: polish(lcp, x),
        pivots,
    })
}

/// Lexicographic minimum of `(value(i), B⁻¹_i) / a_i` over `rows`.
/// The columns of the initial `w` basis hold `B⁻¹`.
fn lex_min_row(
    t: &DMatrix<f64>,
    rows: &[usize],
    a: &DVector<f64>,
    n: usize,
    value: impl Fn(usize) -> f64,
) -> usize {
    let key = |i: usize| -> Vec<f64> {
        std::iter::once(value(i) / a[i])
            .chain((0..n).map(|j| t[(i, j)] / a[i]))
            .collect()
    };
    let mut best = rows[0];
    let mut best_key = key(best);
    for &i in &rows[1..] {
        let k = key(i);
        if lex_less(&k, &best_key) {
            best = i;
            best_key = k;
        }
    }
    best
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        let scale = 1.0 + x.abs().max(y.abs());
        if x < &(y - 1e-12 * scale) {
            return true;
        }
        if x > &(y + 1e-12 * scale) {
            return false;
        }
    }
    false
}

fn pivot(t: &mut DMatrix<f64>, r: usize, e: usize) {
    let p = t[(r, e)];
    let row = t.row(r) / p;
    t.set_row(r, &row);
    for i in 0..t.nrows() {
        if i != r {
            let f = t[(i, e)];
            if f != 0.0 {
                let updated = t.row(i) - &row * f;
                t.set_row(i, &updated);
            }
        }
    }
}

/// Re-solves `M_αα x_α = −q_α` on the support of `x` and keeps the result
/// if it is at least as accurate.
fn polish(lcp: &LcpInstance, x: DVector<f64>) -> DVector<f64> {
    let n = lcp.dim();
    let support: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0).collect();
    if support.is_empty() {
        return x;
    }
    let m_aa = submatrix(&lcp.m, &support, &support);
    let rhs = DVector::from_iterator(support.len(), support.iter().map(|&i| -lcp.q[i]));
    let Some(sol) = m_aa.lu().solve(&rhs) else {
        return x;
    };
    let mut y = DVector::zeros(n);
    for (k, &i) in support.iter().enumerate() {
        y[i] = sol[k];
    }
    if lcp.violation(&y) <= lcp.violation(&x) {
        y
    } else {
        x
    }
}
