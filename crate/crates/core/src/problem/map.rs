use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::error::{check_dim, Error, Result};
use crate::io::serde_helpers;

/// `F(x;ω) = M(ω)x + q(ω)` with `M(ω) = M0 + Σ_k ω_k M_k` and
/// `q(ω) = q0 + Q ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomAffine {
    #[serde(with = "serde_helpers::matrix")]
    pub m_base: DMatrix<f64>,
    /// One matrix per `ω` coordinate; may be empty for a constant `M`.
    #[serde(with = "serde_helpers::matrix_list", default)]
    pub m_omega: Vec<DMatrix<f64>>,
    #[serde(with = "serde_helpers::vector")]
    pub q_base: DVector<f64>,
    /// `n × d` matrix `Q`; may have zero columns.
    #[serde(with = "serde_helpers::matrix")]
    pub q_omega: DMatrix<f64>,
}

impl RandomAffine {
    pub fn new(
        m_base: DMatrix<f64>,
        m_omega: Vec<DMatrix<f64>>,
        q_base: DVector<f64>,
        q_omega: DMatrix<f64>,
    ) -> Result<Self> {
        let map = Self {
            m_base,
            m_omega,
            q_base,
            q_omega,
        };
        map.validate()?;
        Ok(map)
    }

    /// Constant matrix with `q(ω) = q0 + Q ω`.
    pub fn with_random_rhs(m: DMatrix<f64>, q_base: DVector<f64>, q_omega: DMatrix<f64>) -> Result<Self> {
        Self::new(m, Vec::new(), q_base, q_omega)
    }

    pub fn dim(&self) -> usize {
        self.q_base.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        check_dim("affine map rows", n, self.m_base.nrows())?;
        check_dim("affine map cols", n, self.m_base.ncols())?;
        if self.q_omega.nrows() != n && !(self.q_omega.ncols() == 0) {
            return Err(Error::InvalidMap(format!(
                "q_omega has {} rows, expected {n}",
                self.q_omega.nrows()
            )));
        }
        for m in &self.m_omega {
            check_dim("m_omega rows", n, m.nrows())?;
            check_dim("m_omega cols", n, m.ncols())?;
        }
        let finite = self.m_base.iter().all(|v| v.is_finite())
            && self.q_base.iter().all(|v| v.is_finite())
            && self.q_omega.iter().all(|v| v.is_finite())
            && self.m_omega.iter().all(|m| m.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidMap("non-finite affine coefficients".into()));
        }
        Ok(())
    }

    pub fn omega_dim(&self) -> usize {
        self.q_omega.ncols().max(self.m_omega.len())
    }

    pub fn matrix_at(&self, omega: &[f64]) -> DMatrix<f64> {
        let mut m = self.m_base.clone();
        for (k, mk) in self.m_omega.iter().enumerate() {
            let w = omega.get(k).copied().unwrap_or(0.0);
            if w != 0.0 {
                m += mk * w;
            }
        }
        m
    }

    pub fn rhs_at(&self, omega: &[f64]) -> DVector<f64> {
        let mut q = self.q_base.clone();
        for k in 0..self.q_omega.ncols() {
            let w = omega.get(k).copied().unwrap_or(0.0);
            if w != 0.0 {
                q += self.q_omega.column(k) * w;
            }
        }
        q
    }

    pub fn eval(&self, x: &DVector<f64>, omega: &[f64]) -> DVector<f64> {
        self.matrix_at(omega) * x + self.rhs_at(omega)
    }
}

/// One expression per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothMap {
    pub components: Vec<Expr>,
}

/// Per-component interval image `[lower_i(x;ω), upper_i(x;ω)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMap {
    pub lower: Vec<Expr>,
    pub upper: Vec<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioMap {
    RandomAffine(RandomAffine),
    Smooth(SmoothMap),
    IntervalValued(IntervalMap),
}

impl ScenarioMap {
    pub fn dim(&self) -> usize {
        match self {
            ScenarioMap::RandomAffine(a) => a.dim(),
            ScenarioMap::Smooth(s) => s.components.len(),
            ScenarioMap::IntervalValued(m) => m.lower.len(),
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, ScenarioMap::IntervalValued(_))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let check_exprs = |es: &[Expr]| -> Result<()> {
            for e in es {
                e.validate()?;
                let (vars, _) = e.arity();
                if vars > n {
                    return Err(Error::InvalidMap(format!(
                        "expression references x_{} in a map of dimension {n}",
                        vars - 1
                    )));
                }
            }
            Ok(())
        };
        match self {
            ScenarioMap::RandomAffine(a) => a.validate(),
            ScenarioMap::Smooth(s) => check_exprs(&s.components),
            ScenarioMap::IntervalValued(m) => {
                check_dim("interval map upper", n, m.upper.len())?;
                check_exprs(&m.lower)?;
                check_exprs(&m.upper)
            }
        }
    }

    /// `F(x;ω)`. Pure: identical inputs give identical bits.
    pub fn eval(&self, x: &DVector<f64>, omega: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("eval_map", self.dim(), x.len())?;
        Ok(match self {
            ScenarioMap::RandomAffine(a) => a.eval(x, omega.as_slice()),
            ScenarioMap::Smooth(s) => DVector::from_iterator(
                s.components.len(),
                s.components
                    .iter()
                    .map(|e| e.eval(x.as_slice(), omega.as_slice())),
            ),
            ScenarioMap::IntervalValued(_) => return Err(Error::IntervalValuedMap),
        })
    }

    /// Jacobian `∇_x F(x;ω)` (an element of the generalized Jacobian at kinks).
    pub fn jacobian(&self, x: &DVector<f64>, omega: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim("jacobian", self.dim(), x.len())?;
        Ok(match self {
            ScenarioMap::RandomAffine(a) => a.matrix_at(omega.as_slice()),
            ScenarioMap::Smooth(s) => {
                let n = x.len();
                let mut j = DMatrix::zeros(s.components.len(), n);
                for (i, e) in s.components.iter().enumerate() {
                    let (_, g) = e.eval_grad(x.as_slice(), omega.as_slice());
                    for (c, gc) in g.iter().enumerate() {
                        j[(i, c)] = *gc;
                    }
                }
                j
            }
            ScenarioMap::IntervalValued(_) => return Err(Error::IntervalValuedMap),
        })
    }

    /// Lower and upper endpoints of an interval-valued map. Single-valued
    /// maps return the degenerate interval `[F, F]`.
    pub fn eval_interval(
        &self,
        x: &DVector<f64>,
        omega: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        match self {
            ScenarioMap::IntervalValued(m) => {
                check_dim("eval_interval", m.lower.len(), x.len())?;
                let ev = |es: &[Expr]| {
                    DVector::from_iterator(
                        es.len(),
                        es.iter().map(|e| e.eval(x.as_slice(), omega.as_slice())),
                    )
                };
                Ok((ev(&m.lower), ev(&m.upper)))
            }
            _ => {
                let f = self.eval(x, omega)?;
                Ok((f.clone(), f))
            }
        }
    }

    /// Per-component endpoint selection of an interval-valued map.
    pub fn eval_selection(
        &self,
        x: &DVector<f64>,
        omega: &DVector<f64>,
        selector: &[Selector],
    ) -> Result<DVector<f64>> {
        if !self.is_interval() {
            return Err(Error::InvalidMap(
                "eval_selection requires an interval-valued map".into(),
            ));
        }
        check_dim("selector", self.dim(), selector.len())?;
        let (lo, hi) = self.eval_interval(x, omega)?;
        Ok(DVector::from_iterator(
            lo.len(),
            selector.iter().enumerate().map(|(i, s)| match s {
                Selector::Lower => lo[i],
                Selector::Upper => hi[i],
            }),
        ))
    }

    /// `c·F` for `c > 0`.
    pub fn scaled(&self, c: f64) -> ScenarioMap {
        let scale_exprs =
            |es: &[Expr]| es.iter().map(|e| Expr::scaled(c, e.clone())).collect::<Vec<_>>();
        match self {
            ScenarioMap::RandomAffine(a) => ScenarioMap::RandomAffine(RandomAffine {
                m_base: &a.m_base * c,
                m_omega: a.m_omega.iter().map(|m| m * c).collect(),
                q_base: &a.q_base * c,
                q_omega: &a.q_omega * c,
            }),
            ScenarioMap::Smooth(s) => ScenarioMap::Smooth(SmoothMap {
                components: scale_exprs(&s.components),
            }),
            ScenarioMap::IntervalValued(m) => ScenarioMap::IntervalValued(IntervalMap {
                lower: scale_exprs(&m.lower),
                upper: scale_exprs(&m.upper),
            }),
        }
    }

    /// The `ω`-expectation of an affine map in closed form, if affine.
    pub fn affine_at_mean(&self, mean: &DVector<f64>) -> Option<(DMatrix<f64>, DVector<f64>)> {
        match self {
            ScenarioMap::RandomAffine(a) => {
                Some((a.matrix_at(mean.as_slice()), a.rhs_at(mean.as_slice())))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::expr::Expr;

    fn example1() -> ScenarioMap {
        ScenarioMap::RandomAffine(
            RandomAffine::with_random_rhs(
                DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
                DVector::from_column_slice(&[-2.0, -4.0]),
                DMatrix::identity(2, 2),
            )
            .unwrap(),
        )
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn example1_spot_values() {
        let f = example1();
        assert_eq!(f.eval(&v(&[0.0, 2.0]), &v(&[1.0, 1.0])).unwrap(), v(&[1.0, 1.0]));
        assert_eq!(f.eval(&v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), v(&[-2.0, -4.0]));
    }

    #[test]
    fn random_matrix_and_rhs_by_hand() {
        // M(ω) = [[1,0],[0,1]] + ω0 [[0,1],[1,0]], q(ω) = (1, -1) + ω1 (2, 3)
        let map = RandomAffine::new(
            DMatrix::identity(2, 2),
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])],
            v(&[1.0, -1.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 3.0]),
        )
        .unwrap();
        let x = v(&[2.0, 5.0]);
        let w = [0.5, -1.0];
        // hand evaluation: M = [[1, .5], [.5, 1]], Mx = (4.5, 6), q = (-1, -4)
        assert_eq!(map.eval(&x, &w), v(&[3.5, 2.0]));
    }

    #[test]
    fn interval_map_rejected_by_eval() {
        let m = ScenarioMap::IntervalValued(IntervalMap {
            lower: vec![Expr::Const(-3.0)],
            upper: vec![Expr::Const(-1.0)],
        });
        assert!(matches!(
            m.eval(&v(&[0.0]), &v(&[])),
            Err(Error::IntervalValuedMap)
        ));
        let lo = m.eval_selection(&v(&[0.0]), &v(&[]), &[Selector::Lower]).unwrap();
        assert_eq!(lo[0], -3.0);
        let hi = m.eval_selection(&v(&[0.0]), &v(&[]), &[Selector::Upper]).unwrap();
        assert_eq!(hi[0], -1.0);
    }

    #[test]
    fn smooth_jacobian() {
        let m = ScenarioMap::Smooth(SmoothMap {
            components: vec![
                Expr::Product(vec![Expr::Var(0), Expr::Var(1)]),
                Expr::Sum(vec![Expr::Var(1), Expr::Omega(0)]),
            ],
        });
        let j = m.jacobian(&v(&[2.0, 3.0]), &v(&[1.0])).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[3.0, 2.0, 0.0, 1.0]));
    }

    #[test]
    fn smooth_region_interval_is_singleton() {
        let m = ScenarioMap::IntervalValued(IntervalMap {
            lower: vec![Expr::Var(0)],
            upper: vec![Expr::Var(0)],
        });
        let (lo, hi) = m.eval_interval(&v(&[1.5]), &v(&[])).unwrap();
        assert_eq!(lo, hi);
    }
}
