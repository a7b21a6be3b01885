//! Expression grammar for nonlinear scenario maps.
//!
//! Expressions are polynomials in `x` and `ω`, extended with `min`/`max` and
//! with piecewise-affine curves of a scalar argument. Curves carry
//! `ω`-dependent slopes and are continuous by construction; a positive
//! smoothing width replaces each kink by the C¹ quadratic that matches value
//! and slope at the window edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `base + Σ_k coeffs[k]·ω_k`; missing coefficients are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaAffine {
    pub base: f64,
    #[serde(default)]
    pub omega: Vec<f64>,
}

impl OmegaAffine {
    pub fn constant(base: f64) -> Self {
        Self {
            base,
            omega: Vec::new(),
        }
    }

    pub fn new(base: f64, omega: Vec<f64>) -> Self {
        Self { base, omega }
    }

    pub fn eval(&self, omega: &[f64]) -> f64 {
        self.base
            + self
                .omega
                .iter()
                .zip(omega)
                .map(|(c, w)| c * w)
                .sum::<f64>()
    }
}

/// Continuous piecewise-affine function of a scalar.
///
/// Segment `j` has slope `slopes[j]`; segment 0 covers `t <= breakpoints[0]`
/// and the last segment covers everything past the last breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCurve {
    pub breakpoints: Vec<f64>,
    pub intercept: OmegaAffine,
    pub slopes: Vec<OmegaAffine>,
    #[serde(default)]
    pub smoothing: f64,
}

/// Which one-sided slope to report exactly at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Breakpoints closer than this are treated as hit exactly.
pub const BREAKPOINT_SNAP: f64 = 1e-12;

impl PiecewiseCurve {
    pub fn validate(&self) -> Result<()> {
        if self.slopes.len() != self.breakpoints.len() + 1 {
            return Err(Error::InvalidMap(format!(
                "piecewise curve with {} breakpoints needs {} slopes, got {}",
                self.breakpoints.len(),
                self.breakpoints.len() + 1,
                self.slopes.len()
            )));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1])
            || self.breakpoints.iter().any(|b| !b.is_finite())
        {
            return Err(Error::InvalidMap(
                "curve breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if !(self.smoothing >= 0.0) {
            return Err(Error::InvalidMap("smoothing width must be >= 0".into()));
        }
        if self.smoothing > 0.0 {
            let min_gap = self
                .breakpoints
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            if 2.0 * self.smoothing >= min_gap {
                return Err(Error::InvalidMap(
                    "smoothing windows of adjacent breakpoints overlap".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    fn slope_values(&self, omega: &[f64]) -> Vec<f64> {
        self.slopes.iter().map(|s| s.eval(omega)).collect()
    }

    /// Index of the segment containing `t` (right-continuous at breakpoints).
    pub fn segment_of(&self, t: f64) -> usize {
        self.breakpoints.iter().take_while(|b| t >= **b).count()
    }

    fn in_window(&self, t: f64, b: f64) -> bool {
        self.smoothing > 0.0 && (t - b).abs() < self.smoothing
    }

    /// Value of the (smoothed) curve at `t`.
    pub fn value(&self, t: f64, omega: &[f64]) -> f64 {
        let s = self.slope_values(omega);
        let mut v = self.intercept.eval(omega);
        let mut prev = f64::NEG_INFINITY;
        for (j, sj) in s.iter().enumerate() {
            let lo = if j == 0 { f64::NEG_INFINITY } else { prev };
            let hi = self.breakpoints.get(j).copied().unwrap_or(f64::INFINITY);
            // contribution of segment j: slope times the part of [0, t] (or
            // [t, 0] for the first segment) that lies in the segment
            let seg = if j == 0 {
                t.min(hi)
            } else if t > lo {
                t.min(hi) - lo
            } else {
                0.0
            };
            v += sj * seg;
            prev = hi;
        }
        for (j, &b) in self.breakpoints.iter().enumerate() {
            if self.in_window(t, b) {
                let eps = self.smoothing;
                let delta = s[j + 1] - s[j];
                v += delta * (t - b + eps).powi(2) / (4.0 * eps) - delta * (t - b).max(0.0);
            }
        }
        v
    }

    /// Derivative of the curve. Exactly at a breakpoint of an unsmoothed
    /// curve, `side` selects the one-sided derivative.
    pub fn slope(&self, t: f64, omega: &[f64], side: Side) -> f64 {
        let s = self.slope_values(omega);
        for (j, &b) in self.breakpoints.iter().enumerate() {
            if self.in_window(t, b) {
                let eps = self.smoothing;
                return s[j] + (s[j + 1] - s[j]) * (t - b + eps) / (2.0 * eps);
            }
            if self.smoothing == 0.0 && (t - b).abs() <= BREAKPOINT_SNAP {
                return match side {
                    Side::Left => s[j],
                    Side::Right => s[j + 1],
                };
            }
        }
        s[self.segment_of(t)]
    }

    /// Second derivative: zero away from smoothing windows.
    pub fn curvature(&self, t: f64, omega: &[f64]) -> f64 {
        for (j, &b) in self.breakpoints.iter().enumerate() {
            if self.in_window(t, b) {
                let eps = self.smoothing;
                return (self.slopes[j + 1].eval(omega) - self.slopes[j].eval(omega)) / (2.0 * eps);
            }
        }
        0.0
    }

    /// One-sided slopes at `t`: equal unless `t` is (snapped to) a
    /// breakpoint of an unsmoothed curve.
    pub fn slope_interval(&self, t: f64, omega: &[f64]) -> (f64, f64) {
        let l = self.slope(t, omega, Side::Left);
        let r = self.slope(t, omega, Side::Right);
        (l.min(r), l.max(r))
    }
}

/// Which quantity of a curve an expression node reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvePart {
    Value,
    Slope(Side),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    /// Decision variable `x_i`.
    Var(usize),
    /// Random parameter `ω_k`.
    Omega(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
    Curve {
        curve: PiecewiseCurve,
        part: CurvePart,
        arg: Box<Expr>,
    },
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn scaled(c: f64, e: Expr) -> Self {
        Expr::Product(vec![Expr::Const(c), e])
    }

    /// `x_0 + … + x_{n-1}`.
    pub fn var_sum(n: usize) -> Self {
        Expr::Sum((0..n).map(Expr::Var).collect())
    }

    /// Largest variable index + 1 and largest `ω` index + 1 referenced.
    pub fn arity(&self) -> (usize, usize) {
        fn walk(e: &Expr, acc: &mut (usize, usize)) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(i) => acc.0 = acc.0.max(i + 1),
                Expr::Omega(k) => acc.1 = acc.1.max(k + 1),
                Expr::Sum(v) | Expr::Product(v) | Expr::Max(v) | Expr::Min(v) => {
                    v.iter().for_each(|c| walk(c, acc))
                }
                Expr::Pow(b, _) => walk(b, acc),
                Expr::Curve { curve, arg, .. } => {
                    let k = std::iter::once(&curve.intercept)
                        .chain(curve.slopes.iter())
                        .map(|c| c.omega.len())
                        .max()
                        .unwrap_or(0);
                    acc.1 = acc.1.max(k);
                    walk(arg, acc);
                }
            }
        }
        let mut acc = (0, 0);
        walk(self, &mut acc);
        acc
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Expr::Const(c) if !c.is_finite() => {
                Err(Error::InvalidMap("non-finite constant in expression".into()))
            }
            Expr::Sum(v) | Expr::Product(v) => v.iter().try_for_each(Expr::validate),
            Expr::Max(v) | Expr::Min(v) => {
                if v.is_empty() {
                    Err(Error::InvalidMap("empty min/max".into()))
                } else {
                    v.iter().try_for_each(Expr::validate)
                }
            }
            Expr::Pow(b, _) => b.validate(),
            Expr::Curve { curve, arg, .. } => {
                curve.validate()?;
                arg.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], omega: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Omega(k) => omega.get(*k).copied().unwrap_or(0.0),
            Expr::Sum(v) => v.iter().map(|e| e.eval(x, omega)).sum(),
            Expr::Product(v) => v.iter().map(|e| e.eval(x, omega)).product(),
            Expr::Pow(b, p) => b.eval(x, omega).powi(*p as i32),
            Expr::Max(v) => v.iter().map(|e| e.eval(x, omega)).fold(f64::NEG_INFINITY, f64::max),
            Expr::Min(v) => v.iter().map(|e| e.eval(x, omega)).fold(f64::INFINITY, f64::min),
            Expr::Curve { curve, part, arg } => {
                let t = arg.eval(x, omega);
                match part {
                    CurvePart::Value => curve.value(t, omega),
                    CurvePart::Slope(side) => curve.slope(t, omega, *side),
                }
            }
        }
    }

    /// Value and gradient with respect to `x`. At kinks of unsmoothed
    /// curves and at ties of min/max, one element of the generalized
    /// gradient is returned (right slopes, first active argument).
    pub fn eval_grad(&self, x: &[f64], omega: &[f64]) -> (f64, Vec<f64>) {
        let n = x.len();
        match self {
            Expr::Const(c) => (*c, vec![0.0; n]),
            Expr::Var(i) => {
                let mut g = vec![0.0; n];
                g[*i] = 1.0;
                (x[*i], g)
            }
            Expr::Omega(k) => (omega.get(*k).copied().unwrap_or(0.0), vec![0.0; n]),
            Expr::Sum(v) => {
                let mut total = 0.0;
                let mut g = vec![0.0; n];
                for e in v {
                    let (val, ge) = e.eval_grad(x, omega);
                    total += val;
                    axpy(&mut g, 1.0, &ge);
                }
                (total, g)
            }
            Expr::Product(v) => {
                let parts: Vec<_> = v.iter().map(|e| e.eval_grad(x, omega)).collect();
                let value: f64 = parts.iter().map(|p| p.0).product();
                let mut g = vec![0.0; n];
                for (k, (_, gk)) in parts.iter().enumerate() {
                    let others: f64 = parts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, p)| p.0)
                        .product();
                    axpy(&mut g, others, gk);
                }
                (value, g)
            }
            Expr::Pow(b, p) => {
                let (val, gb) = b.eval_grad(x, omega);
                if *p == 0 {
                    return (1.0, vec![0.0; n]);
                }
                let d = *p as f64 * val.powi(*p as i32 - 1);
                (val.powi(*p as i32), gb.iter().map(|g| d * g).collect())
            }
            Expr::Max(v) | Expr::Min(v) => {
                let is_max = matches!(self, Expr::Max(_));
                let mut best: Option<(f64, Vec<f64>)> = None;
                for e in v {
                    let cand = e.eval_grad(x, omega);
                    let better = match &best {
                        None => true,
                        Some((bv, _)) => {
                            if is_max {
                                cand.0 > *bv
                            } else {
                                cand.0 < *bv
                            }
                        }
                    };
                    if better {
                        best = Some(cand);
                    }
                }
                best.expect("validated non-empty")
            }
            Expr::Curve { curve, part, arg } => {
                let (t, ga) = arg.eval_grad(x, omega);
                let (value, d) = match part {
                    CurvePart::Value => (curve.value(t, omega), curve.slope(t, omega, Side::Right)),
                    CurvePart::Slope(side) => {
                        (curve.slope(t, omega, *side), curve.curvature(t, omega))
                    }
                };
                (value, ga.iter().map(|g| d * g).collect())
            }
        }
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    if a == 0.0 {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
