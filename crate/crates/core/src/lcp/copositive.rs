//! Copositivity on the nonnegative orthant by simplicial subdivision.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{max_abs, submatrix, support_of};
use crate::io::serde_helpers;

pub const DEFAULT_MAX_DEPTH: usize = 12;
/// Largest simplex dimension resolved exactly when the depth cap is hit.
const EXACT_LEAF_MAX: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum CopositivityVerdict {
    Copositive {
        /// Deepest subdivision level visited.
        depth: usize,
    },
    /// `x ≥ 0`, `‖x‖₁ = 1` and `xᵀMx = value < 0`.
    NotCopositive {
        #[serde(with = "serde_helpers::vector")]
        witness: DVector<f64>,
        value: f64,
    },
    Undecided {
        max_depth: usize,
    },
}

impl CopositivityVerdict {
    pub fn status(&self) -> &'static str {
        match self {
            CopositivityVerdict::Copositive { .. } => "Copositive",
            CopositivityVerdict::NotCopositive { .. } => "NotCopositive",
            CopositivityVerdict::Undecided { .. } => "Undecided",
        }
    }

    pub fn is_copositive(&self) -> bool {
        matches!(self, CopositivityVerdict::Copositive { .. })
    }
}

struct Simplex {
    vertices: DMatrix<f64>,
    depth: usize,
}

/// Decides whether `xᵀMx ≥ 0` for all `x ≥ 0`.
///
/// Works on the unit simplex with `M` normalized by its largest entry, so
/// `tol` is relative to that entry. Each sub-simplex with vertex matrix `V`
/// is certified when `min_kl (VᵀMV)_kl ≥ −tol`, refuted when some vertex has
/// `vᵀMv < −tol`, and otherwise bisected along its longest edge. Sub-simplices
/// still open at `max_depth` are minimized exactly over their faces when
/// small enough, and reported as undecided otherwise.
pub fn is_copositive(m: &DMatrix<f64>, max_depth: usize, tol: f64) -> CopositivityVerdict {
    assert!(m.is_square(), "copositivity needs a square matrix");
    let n = m.nrows();
    let s = max_abs(m);
    if n == 0 || s == 0.0 {
        return CopositivityVerdict::Copositive { depth: 0 };
    }
    let a = (m + m.transpose()) / (2.0 * s);
    if a.iter().all(|&v| v >= 0.0) {
        return CopositivityVerdict::Copositive { depth: 0 };
    }
    if let Some(i) = (0..n).find(|&i| a[(i, i)] < -tol) {
        let mut witness = DVector::zeros(n);
        witness[i] = 1.0;
        return CopositivityVerdict::NotCopositive {
            value: m[(i, i)],
            witness,
        };
    }
    if a.clone().symmetric_eigenvalues().min() >= -tol {
        return CopositivityVerdict::Copositive { depth: 0 };
    }

    let witness_of = |x: DVector<f64>| {
        let x = &x / x.sum();
        let value = (x.transpose() * m * &x)[(0, 0)];
        CopositivityVerdict::NotCopositive { witness: x, value }
    };
    let mut stack = vec![Simplex {
        vertices: DMatrix::identity(n, n),
        depth: 0,
    }];
    let mut deepest = 0;
    let mut undecided = false;
    while let Some(simplex) = stack.pop() {
        deepest = deepest.max(simplex.depth);
        let v = &simplex.vertices;
        let q = v.transpose() * &a * v;
        if q.min() >= -tol {
            continue;
        }
        if let Some(k) = (0..n).find(|&k| q[(k, k)] < -tol) {
            return witness_of(v.column(k).clone_owned());
        }
        if simplex.depth == max_depth {
            if n <= EXACT_LEAF_MAX {
                let (value, lambda) = simplex_minimum(&q);
                if value < -tol {
                    return witness_of(v * lambda);
                }
            } else {
                undecided = true;
            }
            continue;
        }
        let (i, j) = longest_edge(v);
        let mid = (v.column(i) + v.column(j)) * 0.5;
        let mut left = v.clone();
        left.set_column(i, &mid);
        let mut right = v.clone();
        right.set_column(j, &mid);
        // push right first so the left child is explored first
        stack.push(Simplex {
            vertices: right,
            depth: simplex.depth + 1,
        });
        stack.push(Simplex {
            vertices: left,
            depth: simplex.depth + 1,
        });
    }
    if undecided {
        CopositivityVerdict::Undecided { max_depth }
    } else {
        CopositivityVerdict::Copositive { depth: deepest }
    }
}

fn longest_edge(v: &DMatrix<f64>) -> (usize, usize) {
    let n = v.ncols();
    let mut best = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = (v.column(i) - v.column(j)).norm_squared();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// Exact minimum of `λᵀQλ` over the unit simplex.
///
/// The minimum is attained at a stationary point in the relative interior
/// of some face whose KKT system is nonsingular (on singular faces the value
/// is constant along a line that reaches a smaller face), so enumerating
/// faces finds it.
pub(crate) fn simplex_minimum(q: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let k = q.nrows();
    let mut best = (f64::INFINITY, DVector::zeros(k));
    for mask in 1..1usize << k {
        let (face, _) = support_of(mask, k);
        let f = face.len();
        let mut kkt = DMatrix::zeros(f + 1, f + 1);
        kkt.view_mut((0, 0), (f, f)).copy_from(&submatrix(q, &face, &face));
        for r in 0..f {
            kkt[(r, f)] = -1.0;
            kkt[(f, r)] = 1.0;
        }
        let mut rhs = DVector::zeros(f + 1);
        rhs[f] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        if (0..f).any(|r| !(sol[r] >= -1e-14)) {
            continue;
        }
        let mut lambda = DVector::zeros(k);
        for (r, &i) in face.iter().enumerate() {
            lambda[i] = sol[r].max(0.0);
        }
        let total = lambda.sum();
        if total <= 0.0 {
            continue;
        }
        lambda /= total;
        let value = (lambda.transpose() * q * &lambda)[(0, 0)];
        if value < best.0 {
            best = (value, lambda);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_copositive() {
        assert!(is_copositive(&DMatrix::identity(3, 3), DEFAULT_MAX_DEPTH, 1e-8).is_copositive());
    }

    #[test]
    fn negative_offdiagonal_refuted_at_midpoint() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 1.0]);
        let CopositivityVerdict::NotCopositive { witness, value } =
            is_copositive(&m, DEFAULT_MAX_DEPTH, 1e-8)
        else {
            panic!("expected a witness")
        };
        assert!((witness - DVector::from_element(2, 0.5)).amax() < 1e-15);
        assert!((value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn nonnegative_matrix_at_depth_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 1.0, 0.0]);
        assert_eq!(
            is_copositive(&m, DEFAULT_MAX_DEPTH, 1e-8),
            CopositivityVerdict::Copositive { depth: 0 }
        );
    }

    #[test]
    fn copositive_but_not_psd_needs_subdivision() {
        // Horn-like 3x3: [[1,-1,1],[-1,1,1],[1,1,1]]; zero minimum on an edge
        let m = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(m.clone().symmetric_eigenvalues().min() < 0.0);
        assert!(is_copositive(&m, DEFAULT_MAX_DEPTH, 1e-8).is_copositive());
    }

    #[test]
    fn interior_negative_minimum_found() {
        // xᵀMx = (x1 - x2)² - 0.1 x1 x2 ... negative only near x1 = x2
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.05, -1.05, 1.0]);
        let v = is_copositive(&m, DEFAULT_MAX_DEPTH, 1e-8);
        let CopositivityVerdict::NotCopositive { witness, value } = v else {
            panic!("expected a witness, got {v:?}")
        };
        assert!(value < 0.0 && witness.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn simplex_minimum_matches_closed_form() {
        // min of x² + y² on the simplex is 1/2 at (1/2, 1/2)
        let (v, l) = simplex_minimum(&DMatrix::identity(2, 2));
        assert!((v - 0.5).abs() < 1e-15);
        assert!((l - DVector::from_element(2, 0.5)).amax() < 1e-15);
    }
}
