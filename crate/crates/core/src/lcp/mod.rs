//! Small dense linear complementarity problems: Lemke pivoting, exhaustive
//! enumeration, copositivity and R0 tests.

pub mod copositive;
pub mod enumerate;
pub mod feasibility;
pub mod lemke;
pub mod r0;
pub mod scale;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::io::serde_helpers;

pub use copositive::{is_copositive, CopositivityVerdict, DEFAULT_MAX_DEPTH};
pub use enumerate::{enumerate_lcp_solutions, DegenerateSupport, EnumeratedSolution, Enumeration, MAX_ENUMERATION_DIM};
pub use feasibility::find_feasible;
pub use lemke::{lemke_solve, LemkeOutcome};
pub use r0::{is_r0_pair, R0Verdict};
pub use scale::{normalize_scale, spectral_norm};

/// `LCP(q, M)`: find `x ≥ 0` with `Mx + q ≥ 0` and `xᵀ(Mx + q) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcpInstance {
    #[serde(rename = "M", with = "serde_helpers::matrix")]
    pub m: DMatrix<f64>,
    #[serde(with = "serde_helpers::vector")]
    pub q: DVector<f64>,
}

impl LcpInstance {
    pub fn new(m: DMatrix<f64>, q: DVector<f64>) -> Result<Self> {
        let lcp = Self { m, q };
        lcp.validate()?;
        Ok(lcp)
    }

    pub fn from_rows(m: &[&[f64]], q: &[f64]) -> Result<Self> {
        let n = q.len();
        let mut mat = DMatrix::zeros(m.len(), n);
        for (i, row) in m.iter().enumerate() {
            check_dim("LCP matrix row", n, row.len())?;
            for (j, v) in row.iter().enumerate() {
                mat[(i, j)] = *v;
            }
        }
        Self::new(mat, DVector::from_column_slice(q))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m.is_square() {
            return Err(Error::InvalidProblem(format!(
                "LCP matrix is {}x{}, expected square",
                self.m.nrows(),
                self.m.ncols()
            )));
        }
        check_dim("LCP vector", self.m.nrows(), self.q.len())?;
        if self.m.iter().chain(self.q.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("LCP data must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `w = Mx + q`.
    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m * x + &self.q
    }

    /// Largest violation of `x ≥ 0`, `w ≥ 0` and `|x_i w_i|`.
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        let w = self.slack(x);
        x.iter()
            .zip(w.iter())
            .map(|(&xi, &wi)| (-xi).max(-wi).max((xi * wi).abs()))
            .fold(0.0, f64::max)
    }
}

/// Max-abs entry, the scale used to make tolerances scale invariant.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
}

/// Principal submatrix `M[rows, cols]`.
pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub(crate) fn support_of(mask: usize, n: usize) -> (Vec<usize>, Vec<usize>) {
    (0..n).partition(|i| mask >> i & 1 == 1)
}
