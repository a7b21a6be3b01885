//! R0 test for the nonnegative orthant: does `CP(Rⁿ₊, 0, M)` have a
//! nonzero solution?

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::enumerate::MAX_ENUMERATION_DIM;
use super::feasibility::find_feasible;
use super::{max_abs, submatrix, support_of};
use crate::error::{Error, Result};
use crate::io::serde_helpers;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum R0Verdict {
    R0,
    /// `d ≥ 0`, `Md ≥ 0`, `dᵀMd = 0`, `‖d‖₁ = 1`.
    NotR0 {
        #[serde(with = "serde_helpers::vector")]
        witness: DVector<f64>,
    },
}

impl R0Verdict {
    pub fn is_r0(&self) -> bool {
        matches!(self, R0Verdict::R0)
    }
}

/// Searches every support `α` for `x_α ≥ 0` with `M_αα x_α = 0`,
/// `1ᵀx_α = 1` and `M_ᾱα x_α ≥ 0`. The matrix is normalized by its largest
/// entry first, so the verdict does not depend on the scale of `M`.
pub fn is_r0_pair(m: &DMatrix<f64>, tol: f64) -> Result<R0Verdict> {
    if !m.is_square() {
        return Err(Error::InvalidProblem("R0 test needs a square matrix".into()));
    }
    let n = m.nrows();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::SizeLimit {
            n,
            max: MAX_ENUMERATION_DIM,
        });
    }
    let s = max_abs(m);
    if s == 0.0 {
        let mut witness = DVector::zeros(n);
        if n > 0 {
            witness[0] = 1.0;
            return Ok(R0Verdict::NotR0 { witness });
        }
        return Ok(R0Verdict::R0);
    }
    let m = m / s;
    for mask in 1..1usize << n {
        let (alpha, beta) = support_of(mask, n);
        let k = alpha.len();
        let mut a_eq = DMatrix::zeros(k + 1, k);
        a_eq.view_mut((0, 0), (k, k)).copy_from(&submatrix(&m, &alpha, &alpha));
        a_eq.row_mut(k).fill(1.0);
        let mut b_eq = DVector::zeros(k + 1);
        b_eq[k] = 1.0;
        let a_ge = submatrix(&m, &beta, &alpha);
        if let Some(xa) = find_feasible(&a_eq, &b_eq, &a_ge, &DVector::zeros(beta.len()), tol) {
            let mut witness = DVector::zeros(n);
            for (j, &i) in alpha.iter().enumerate() {
                witness[i] = xa[j];
            }
            let l1 = witness.sum();
            return Ok(R0Verdict::NotR0 {
                witness: witness / l1,
            });
        }
    }
    Ok(R0Verdict::R0)
}
