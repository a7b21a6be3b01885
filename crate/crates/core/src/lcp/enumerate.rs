//! Exhaustive enumeration of complementary supports.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::feasibility::find_feasible;
use super::{max_abs, submatrix, support_of, LcpInstance};
use crate::error::{Error, Result};
use crate::io::serde_helpers;

pub const MAX_ENUMERATION_DIM: usize = 12;
const DEDUP_TOL: f64 = 1e-8;
/// Relative pivot size below which a principal submatrix counts as singular.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedSolution {
    #[serde(with = "serde_helpers::vector")]
    pub x: DVector<f64>,
    /// Supports (0-based index sets) that produced this point.
    pub supports: Vec<Vec<usize>>,
}

/// A support whose principal submatrix is singular. If the support admits
/// solutions they form a family; `point` is one member and `ray` a
/// normalized (‖·‖₁ = 1) direction of unboundedness when one exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateSupport {
    pub support: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_helpers::opt_vector")]
    pub point: Option<DVector<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_helpers::opt_vector")]
    pub ray: Option<DVector<f64>>,
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    /// Isolated solutions from nonsingular supports, deduplicated.
    pub solutions: Vec<EnumeratedSolution>,
    pub degenerate: Vec<DegenerateSupport>,
}

impl Enumeration {
    /// Every solution point, including representatives of degenerate families.
    pub fn all_points(&self) -> Vec<DVector<f64>> {
        self.solutions
            .iter()
            .map(|s| s.x.clone())
            .chain(self.degenerate.iter().filter_map(|d| d.point.clone()))
            .collect()
    }

    /// Whether `x` matches an enumerated solution within `tol`, or lies in
    /// a degenerate family (checked through the LCP conditions directly).
    pub fn contains(&self, lcp: &LcpInstance, x: &DVector<f64>, tol: f64) -> bool {
        if self.solutions.iter().any(|s| (&s.x - x).amax() <= tol) {
            return true;
        }
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > tol).collect();
        self.degenerate
            .iter()
            .any(|d| d.point.is_some() && support.iter().all(|i| d.support.contains(i)))
            && lcp.violation(x) <= tol
    }
}

/// Enumerates all `2ⁿ` complementary supports `α`, solving
/// `M_αα x_α = −q_α` with `x_ᾱ = 0` and keeping the feasible candidates.
pub fn enumerate_lcp_solutions(lcp: &LcpInstance, tol: f64) -> Result<Enumeration> {
    lcp.validate()?;
    let n = lcp.dim();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::SizeLimit {
            n,
            max: MAX_ENUMERATION_DIM,
        });
    }
    let scale = max_abs(&lcp.m).max(1.0);
    let mut out = Enumeration::default();
    for mask in 0..1usize << n {
        let (alpha, beta) = support_of(mask, n);
        if alpha.is_empty() {
            if lcp.q.iter().all(|&v| v >= -tol) {
                push_unique(&mut out.solutions, DVector::zeros(n), alpha);
            }
            continue;
        }
        let m_aa = submatrix(&lcp.m, &alpha, &alpha);
        let q_a = DVector::from_iterator(alpha.len(), alpha.iter().map(|&i| -lcp.q[i]));
        let lu = m_aa.clone().lu();
        let u = lu.u();
        let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if min_pivot <= SINGULAR_TOL * scale {
            out.degenerate.push(degenerate_family(lcp, &alpha, &beta, &m_aa, &q_a, tol));
            continue;
        }
        let Some(xa) = lu.solve(&q_a) else { continue };
        let mut x = DVector::zeros(n);
        for (k, &i) in alpha.iter().enumerate() {
            x[i] = xa[k];
        }
        let w = lcp.slack(&x);
        let feasible = alpha.iter().all(|&i| x[i] >= -tol) && beta.iter().all(|&i| w[i] >= -tol);
        if feasible {
            let x = x.map(|v| v.max(0.0));
            push_unique(&mut out.solutions, x, alpha);
        }
    }
    Ok(out)
}

fn push_unique(solutions: &mut Vec<EnumeratedSolution>, x: DVector<f64>, support: Vec<usize>) {
    if let Some(s) = solutions.iter_mut().find(|s| (&s.x - &x).amax() <= DEDUP_TOL) {
        s.supports.push(support);
    } else {
        solutions.push(EnumeratedSolution {
            x,
            supports: vec![support],
        });
    }
}

fn degenerate_family(
    lcp: &LcpInstance,
    alpha: &[usize],
    beta: &[usize],
    m_aa: &DMatrix<f64>,
    q_a: &DVector<f64>,
    tol: f64,
) -> DegenerateSupport {
    let n = lcp.dim();
    let m_ba = submatrix(&lcp.m, beta, alpha);
    let q_b = DVector::from_iterator(beta.len(), beta.iter().map(|&i| -lcp.q[i]));
    let embed = |xa: DVector<f64>| {
        let mut x = DVector::zeros(n);
        for (k, &i) in alpha.iter().enumerate() {
            x[i] = xa[k];
        }
        x
    };
    let point = find_feasible(m_aa, q_a, &m_ba, &q_b, tol).map(embed);
    let ray = point.as_ref().and_then(|_| {
        let k = alpha.len();
        let mut a_eq = DMatrix::zeros(k + 1, k);
        a_eq.view_mut((0, 0), (k, k)).copy_from(m_aa);
        a_eq.row_mut(k).fill(1.0);
        let mut b_eq = DVector::zeros(k + 1);
        b_eq[k] = 1.0;
        find_feasible(&a_eq, &b_eq, &m_ba, &DVector::zeros(beta.len()), tol).map(embed)
    });
    let note = match (&point, &ray) {
        (None, _) => "singular principal submatrix; no solution on this support",
        (Some(_), None) => "singular principal submatrix; bounded solution family",
        (Some(_), Some(_)) => "singular principal submatrix; unbounded solution family",
    };
    DegenerateSupport {
        support: alpha.to_vec(),
        point,
        ray,
        note: note.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_two_solution() {
        let lcp = LcpInstance::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]], &[-3.0, -5.0]).unwrap();
        let e = enumerate_lcp_solutions(&lcp, 1e-10).unwrap();
        assert_eq!(e.solutions.len(), 1);
        let x = &e.solutions[0].x;
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-14 && (x[1] - 7.0 / 3.0).abs() < 1e-14);
        assert!(e.degenerate.is_empty());
    }

    #[test]
    fn identity_with_positive_q() {
        let lcp = LcpInstance::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 1.0]).unwrap();
        let e = enumerate_lcp_solutions(&lcp, 1e-10).unwrap();
        assert_eq!(e.solutions.len(), 1);
        assert_eq!(e.solutions[0].x, DVector::zeros(2));
    }

    #[test]
    fn swap_matrix_families() {
        let lcp = LcpInstance::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]], &[0.0, 0.0]).unwrap();
        let e = enumerate_lcp_solutions(&lcp, 1e-10).unwrap();
        assert_eq!(e.solutions.len(), 1);
        assert!(e.solutions[0].supports[0].is_empty());
        let fam: Vec<_> = e.degenerate.iter().filter(|d| d.ray.is_some()).collect();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam[0].support, vec![0]);
        assert_eq!(fam[0].ray.as_ref().unwrap(), &DVector::from_column_slice(&[1.0, 0.0]));
        assert_eq!(fam[1].support, vec![1]);
        assert_eq!(fam[1].ray.as_ref().unwrap(), &DVector::from_column_slice(&[0.0, 1.0]));
        // the full support {0,1} has M nonsingular, x = 0 only
        assert!(e.contains(&lcp, &DVector::from_column_slice(&[3.0, 0.0]), 1e-9));
    }

    #[test]
    fn size_limit() {
        let lcp = LcpInstance::new(DMatrix::identity(13, 13), DVector::zeros(13)).unwrap();
        assert!(matches!(
            enumerate_lcp_solutions(&lcp, 1e-10),
            Err(Error::SizeLimit { n: 13, max: 12 })
        ));
    }
}
