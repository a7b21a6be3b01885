//! Feasible regions.
//!
//! Every supported ground set is a (possibly unbounded) box, so projection is
//! componentwise clamping. The variants keep the block structure that the
//! certificates and the complementarity solvers need.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::io::serde_helpers;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundSet {
    NonnegOrthant {
        dim: usize,
    },
    /// `lower <= x <= upper`; unbounded sides are `±inf` (`null` on disk).
    Box {
        #[serde(with = "serde_helpers::lower_bounds")]
        lower: Vec<f64>,
        #[serde(with = "serde_helpers::upper_bounds")]
        upper: Vec<f64>,
    },
    Cartesian {
        blocks: Vec<GroundSet>,
    },
    /// The first `nonneg_dim` coordinates are sign constrained, the
    /// remaining `free_dim` are free (mixed complementarity).
    MixedPartition {
        nonneg_dim: usize,
        free_dim: usize,
    },
}

/// Sign structure of one coordinate of a cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeComponent {
    Nonneg,
    Free,
}

impl GroundSet {
    pub fn orthant(dim: usize) -> Self {
        GroundSet::NonnegOrthant { dim }
    }

    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let set = GroundSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    pub fn cartesian(blocks: Vec<GroundSet>) -> Result<Self> {
        let set = GroundSet::Cartesian { blocks };
        set.validate()?;
        Ok(set)
    }

    pub fn mixed(nonneg_dim: usize, free_dim: usize) -> Self {
        GroundSet::MixedPartition {
            nonneg_dim,
            free_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroundSet::NonnegOrthant { .. } | GroundSet::MixedPartition { .. } => Ok(()),
            GroundSet::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(Error::InvalidSet(format!(
                        "box bounds have lengths {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return Err(Error::InvalidSet(format!(
                            "box coordinate {i} has lower {l} and upper {u}"
                        )));
                    }
                }
                Ok(())
            }
            GroundSet::Cartesian { blocks } => {
                if blocks.is_empty() {
                    return Err(Error::InvalidSet("cartesian product with no blocks".into()));
                }
                blocks.iter().try_for_each(GroundSet::validate)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GroundSet::NonnegOrthant { dim } => *dim,
            GroundSet::Box { lower, .. } => lower.len(),
            GroundSet::Cartesian { blocks } => blocks.iter().map(GroundSet::dim).sum(),
            GroundSet::MixedPartition {
                nonneg_dim,
                free_dim,
            } => nonneg_dim + free_dim,
        }
    }

    /// Componentwise bounds of the set.
    pub fn bounds(&self) -> (DVector<f64>, DVector<f64>) {
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        self.push_bounds(&mut lower, &mut upper);
        (DVector::from_vec(lower), DVector::from_vec(upper))
    }

    fn push_bounds(&self, lower: &mut Vec<f64>, upper: &mut Vec<f64>) {
        match self {
            GroundSet::NonnegOrthant { dim } => {
                lower.extend(std::iter::repeat_n(0.0, *dim));
                upper.extend(std::iter::repeat_n(f64::INFINITY, *dim));
            }
            GroundSet::Box { lower: l, upper: u } => {
                lower.extend_from_slice(l);
                upper.extend_from_slice(u);
            }
            GroundSet::Cartesian { blocks } => {
                for b in blocks {
                    b.push_bounds(lower, upper);
                }
            }
            GroundSet::MixedPartition {
                nonneg_dim,
                free_dim,
            } => {
                lower.extend(std::iter::repeat_n(0.0, *nonneg_dim));
                lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, *free_dim));
                upper.extend(std::iter::repeat_n(f64::INFINITY, nonneg_dim + free_dim));
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("project", self.dim(), x.len())?;
        let (lower, upper) = self.bounds();
        Ok(clamp(x, &lower, &upper))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let (lower, upper) = self.bounds();
        x.iter()
            .zip(lower.iter().zip(upper.iter()))
            .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }

    /// Coordinate ranges of the Cartesian blocks (a single range otherwise).
    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        match self {
            GroundSet::Cartesian { blocks } => {
                let mut start = 0;
                blocks
                    .iter()
                    .map(|b| {
                        let r = start..start + b.dim();
                        start = r.end;
                        r
                    })
                    .collect()
            }
            other => vec![0..other.dim()],
        }
    }

    pub fn is_cone(&self) -> bool {
        matches!(
            self,
            GroundSet::NonnegOrthant { .. } | GroundSet::MixedPartition { .. }
        )
    }

    /// Sign pattern for cone variants; `None` for boxes that are not cones.
    pub fn cone_components(&self) -> Option<Vec<ConeComponent>> {
        match self {
            GroundSet::NonnegOrthant { dim } => Some(vec![ConeComponent::Nonneg; *dim]),
            GroundSet::MixedPartition {
                nonneg_dim,
                free_dim,
            } => {
                let mut v = vec![ConeComponent::Nonneg; *nonneg_dim];
                v.extend(std::iter::repeat_n(ConeComponent::Free, *free_dim));
                Some(v)
            }
            _ => None,
        }
    }

    /// The translate `shift + self`, as a box.
    pub fn translated(&self, shift: &DVector<f64>) -> Result<GroundSet> {
        check_dim("translated", self.dim(), shift.len())?;
        let (lower, upper) = self.bounds();
        Ok(GroundSet::Box {
            lower: (lower + shift).iter().copied().collect(),
            upper: (upper + shift).iter().copied().collect(),
        })
    }

    /// Signs allowed for recession directions, per coordinate:
    /// `(may_increase, may_decrease)`.
    pub fn recession_signs(&self) -> Vec<(bool, bool)> {
        let (lower, upper) = self.bounds();
        lower
            .iter()
            .zip(upper.iter())
            .map(|(l, u)| (u.is_infinite(), l.is_infinite()))
            .collect()
    }

    pub fn is_bounded(&self) -> bool {
        let (lower, upper) = self.bounds();
        lower.iter().chain(upper.iter()).all(|v| v.is_finite())
    }
}

pub(crate) fn clamp(x: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        x.iter()
            .zip(lower.iter().zip(upper.iter()))
            .map(|(v, (l, u))| v.max(*l).min(*u)),
    )
}

/// `x ↦ matrix·x + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(with = "serde_helpers::matrix")]
    pub matrix: DMatrix<f64>,
    #[serde(with = "serde_helpers::vector")]
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        check_dim("affine map offset", matrix.nrows(), offset.len())?;
        Ok(Self { matrix, offset })
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x + &self.offset
    }

    /// Spectral norm of the linear part, i.e. the Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix.clone().svd(false, false).singular_values.max()
    }
}

/// Moving feasible set `K(x)` of a quasi-variational inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MovingSet {
    /// `K(x) = c(x) + K0`, with `K0` the problem's ground set.
    Translated { shift: AffineMap },
    /// `K(x) = K0 ∩ [lower(x), upper(x)]`; a missing side leaves `K0` as is.
    AffineBox {
        lower: Option<AffineMap>,
        upper: Option<AffineMap>,
    },
}

impl MovingSet {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check = |m: &AffineMap| -> Result<()> {
            check_dim("moving set map rows", dim, m.matrix.nrows())?;
            check_dim("moving set map cols", dim, m.matrix.ncols())?;
            check_dim("moving set offset", dim, m.offset.len())
        };
        match self {
            MovingSet::Translated { shift } => check(shift),
            MovingSet::AffineBox { lower, upper } => {
                lower.iter().chain(upper.iter()).try_for_each(check)
            }
        }
    }

    /// The set `K(x)` as a box. Fails when the image is empty.
    pub fn image(&self, base: &GroundSet, x: &DVector<f64>) -> Result<GroundSet> {
        check_dim("moving set image", base.dim(), x.len())?;
        match self {
            MovingSet::Translated { shift } => base.translated(&shift.apply(x)),
            MovingSet::AffineBox { lower, upper } => {
                let (mut lo, mut hi) = base.bounds();
                if let Some(l) = lower {
                    lo = lo.zip_map(&l.apply(x), f64::max);
                }
                if let Some(u) = upper {
                    hi = hi.zip_map(&u.apply(x), f64::min);
                }
                if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
                    return Err(Error::InvalidSet(
                        "moving set image is empty at the given point".into(),
                    ));
                }
                Ok(GroundSet::Box {
                    lower: lo.iter().copied().collect(),
                    upper: hi.iter().copied().collect(),
                })
            }
        }
    }

    /// Whether `x ∈ K(x)` within `tol`.
    pub fn is_fixed_point_feasible(&self, base: &GroundSet, x: &DVector<f64>, tol: f64) -> bool {
        match self.image(base, x) {
            Ok(k) => k.contains(x, tol),
            Err(_) => false,
        }
    }

    /// Lipschitz constant of the parametrization in `x`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            MovingSet::Translated { shift } => shift.lipschitz(),
            MovingSet::AffineBox { lower, upper } => lower
                .iter()
                .chain(upper.iter())
                .map(AffineMap::lipschitz)
                .fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn orthant_projection() {
        let p = GroundSet::orthant(2).project(&v(&[-1.0, 3.0])).unwrap();
        assert_eq!(p, v(&[0.0, 3.0]));
    }

    #[test]
    fn box_projection_clamps() {
        let b = GroundSet::new_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.project(&v(&[2.0, -2.0])).unwrap(), v(&[1.0, 0.0]));
    }

    #[test]
    fn cartesian_projection_is_blockwise() {
        let set = GroundSet::cartesian(vec![
            GroundSet::orthant(1),
            GroundSet::new_box(vec![-1.0], vec![1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(set.project(&v(&[-5.0, 5.0])).unwrap(), v(&[0.0, 1.0]));
        assert_eq!(set.block_ranges(), vec![0..1, 1..2]);
    }

    #[test]
    fn infinite_box_sides_are_unbounded() {
        let b = GroundSet::new_box(vec![f64::NEG_INFINITY], vec![2.0]).unwrap();
        assert_eq!(b.project(&v(&[-1e300])).unwrap(), v(&[-1e300]));
        assert_eq!(b.recession_signs(), vec![(false, true)]);
    }

    #[test]
    fn invalid_box_rejected() {
        assert!(GroundSet::new_box(vec![1.0], vec![0.0]).is_err());
        assert!(GroundSet::new_box(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            GroundSet::orthant(3).project(&v(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mixed_partition_bounds() {
        let set = GroundSet::mixed(2, 1);
        assert_eq!(set.project(&v(&[-1.0, 2.0, -3.0])).unwrap(), v(&[0.0, 2.0, -3.0]));
        assert_eq!(
            set.cone_components().unwrap(),
            vec![ConeComponent::Nonneg, ConeComponent::Nonneg, ConeComponent::Free]
        );
    }

    #[test]
    fn translated_moving_set() {
        let m = MovingSet::Translated {
            shift: AffineMap::new(DMatrix::from_element(1, 1, 0.25), v(&[0.0])).unwrap(),
        };
        let base = GroundSet::orthant(1);
        let k = m.image(&base, &v(&[4.0])).unwrap();
        assert_eq!(k.bounds().0, v(&[1.0]));
        assert!(m.is_fixed_point_feasible(&base, &v(&[2.0]), 0.0));
        assert!((m.lipschitz() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn affine_box_shared_capacity() {
        // x_i <= 10 - sum_{j != i} x_j
        let upper = AffineMap::new(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]),
            v(&[10.0, 10.0]),
        )
        .unwrap();
        let m = MovingSet::AffineBox {
            lower: None,
            upper: Some(upper),
        };
        let base = GroundSet::orthant(2);
        assert!(m.is_fixed_point_feasible(&base, &v(&[4.0, 6.0]), 1e-12));
        assert!(!m.is_fixed_point_feasible(&base, &v(&[5.0, 6.0]), 1e-12));
    }
}
