//! Phase-one simplex for small feasibility problems.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 20_000;

/// Finds `x ≥ 0` with `A_eq x = b_eq` and `A_ge x ≥ b_ge`, or `None` if the
/// system is infeasible at tolerance `tol`.
///
/// Dense tableau, Bland's rule; intended for the handful of constraints that
/// arise from principal supports of small matrices.
pub fn find_feasible(
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
    a_ge: &DMatrix<f64>,
    b_ge: &DVector<f64>,
    tol: f64,
) -> Option<DVector<f64>> {
    let n = a_eq.ncols().max(a_ge.ncols());
    let m_eq = a_eq.nrows();
    let m_ge = a_ge.nrows();
    let m = m_eq + m_ge;
    if m == 0 {
        return Some(DVector::zeros(n));
    }
    // columns: x (n) | surplus (m_ge) | artificial (m) | rhs
    let cols = n + m_ge + m;
    let mut t = DMatrix::<f64>::zeros(m, cols + 1);
    for i in 0..m {
        let (row, rhs) = if i < m_eq {
            (a_eq.row(i).clone_owned(), b_eq[i])
        } else {
            (a_ge.row(i - m_eq).clone_owned(), b_ge[i - m_eq])
        };
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * row[j];
        }
        if i >= m_eq {
            t[(i, n + i - m_eq)] = -sign;
        }
        t[(i, n + m_ge + i)] = 1.0;
        t[(i, cols)] = sign * rhs;
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m_ge + i).collect();
    let artificial = |j: usize| j >= n + m_ge;

    // Phase-one cost: sum of artificials, reduced costs over all columns.
    let reduced = |t: &DMatrix<f64>, basis: &[usize], j: usize| -> f64 {
        let c = if artificial(j) { 1.0 } else { 0.0 };
        c - (0..m)
            .filter(|&i| artificial(basis[i]))
            .map(|i| t[(i, j)])
            .sum::<f64>()
    };

    for _ in 0..MAX_PIVOTS {
        let entering =
            (0..cols).find(|&j| !basis.contains(&j) && reduced(&t, &basis, j) < -PIVOT_TOL);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[(i, e)];
            if a > PIVOT_TOL {
                let ratio = t[(i, cols)] / a;
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below, so an unbounded column cannot occur.
        let Some((r, _)) = leave else { break };
        pivot(&mut t, r, e);
        basis[r] = e;
    }

    let scale = 1.0 + b_eq.iter().chain(b_ge.iter()).fold(0.0, |a: f64, v| a.max(v.abs()));
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|&(_, &j)| artificial(j))
        .map(|(i, _)| t[(i, cols)])
        .sum();
    if infeasibility > tol * scale {
        return None;
    }
    let mut x = DVector::zeros(n);
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[(i, cols)].max(0.0);
        }
    }
    Some(x)
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_point_in_simplex_slice() {
        // x1 + x2 = 1, x1 - x2 >= 0.5
        let a_eq = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let a_ge = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let x = find_feasible(
            &a_eq,
            &DVector::from_element(1, 1.0),
            &a_ge,
            &DVector::from_element(1, 0.5),
            1e-10,
        )
        .unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!(x[0] - x[1] >= 0.5 - 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        // x1 + x2 = 1 and -x1 - x2 >= 0 with x >= 0
        let a_eq = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let a_ge = DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]);
        assert!(find_feasible(
            &a_eq,
            &DVector::from_element(1, 1.0),
            &a_ge,
            &DVector::zeros(1),
            1e-10
        )
        .is_none());
    }

    #[test]
    fn negative_rhs_rows() {
        // -x1 = -2
        let a_eq = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let x = find_feasible(
            &a_eq,
            &DVector::from_element(1, -2.0),
            &DMatrix::zeros(0, 1),
            &DVector::zeros(0),
            1e-10,
        )
        .unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
    }
}
