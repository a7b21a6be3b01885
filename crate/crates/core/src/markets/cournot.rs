use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certificates::{
    rays::interval_inf_dot, tail_slope, CertificateReport, Evidence, Verdict, Witness, DEFAULT_SCENARIO_DRAWS,
    TAIL_WINDOW,
};
use crate::error::{check_dim, Error, Result};
use crate::problem::scenario::certificate_scenarios;
use crate::problem::{
    AffineMap, CurvePart, Expr, GroundSet, IntervalMap, MovingSet, OmegaAffine, PiecewiseCurve, ProblemInstance,
    ProblemKind, ScenarioMap, ScenarioModel, Side, SmoothMap,
};

/// An `N`-firm Cournot game.
///
/// Firm `i` pays `½γ_i x_i² + δ_i x_i` and sells at the common price
/// `p(X;ω)`, `X = Σ x_i`. The price starts at `intercept(ω)` and falls with
/// slope `−slopes[j](ω)` on segment `j`; later segment intercepts follow from
/// continuity at the breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CournotConfig {
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub breakpoints: Vec<f64>,
    pub intercept: OmegaAffine,
    pub slopes: Vec<OmegaAffine>,
    /// Per-firm upper bounds on output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<f64>>,
    /// Shared capacity `C`: firm `i` may produce at most `C − Σ_{j≠i} x_j`,
    /// which turns the game into a quasi-variational inequality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_capacity: Option<f64>,
    /// Half-width of the quadratic blend around each breakpoint.
    #[serde(default)]
    pub smoothing: f64,
    pub scenarios: ScenarioModel,
}

/// The nonsmooth game and its single-valued smoothing.
#[derive(Clone, Debug, PartialEq)]
pub struct CournotInstances {
    /// Map component `i` is the interval `c_i′(x_i) − p(X;ω) − x_i·∂p(X;ω)`.
    pub interval: ProblemInstance,
    /// `p` replaced by its blend of width `smoothing`; with zero width the
    /// left derivative is used at breakpoints.
    pub smoothed: ProblemInstance,
}

impl CournotConfig {
    /// Two firms, one breakpoint at `X = 6`, `ω = ±(1, 1)` with equal
    /// weight; the expected game has its equilibrium at `(5.625, 5.125)`.
    pub fn two_firm_default() -> Self {
        Self {
            gamma: vec![1.0, 1.0],
            delta: vec![2.0, 3.0],
            breakpoints: vec![6.0],
            intercept: OmegaAffine::new(30.0, vec![0.0, 2.0]),
            slopes: vec![OmegaAffine::new(2.0, vec![0.2]), OmegaAffine::new(1.0, vec![0.1])],
            capacities: None,
            shared_capacity: None,
            smoothing: 0.0,
            scenarios: ScenarioModel::two_point(vec![1.0, 1.0], vec![-1.0, -1.0]),
        }
    }

    pub fn firms(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.firms();
        if n == 0 {
            return Err(Error::InvalidProblem("a Cournot game needs at least one firm".into()));
        }
        check_dim("cournot delta", n, self.delta.len())?;
        if self.gamma.iter().chain(&self.delta).any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidProblem("cost coefficients must be finite and >= 0".into()));
        }
        if self.breakpoints.first().is_some_and(|b| !(*b > 0.0)) {
            return Err(Error::InvalidProblem("breakpoints must be positive".into()));
        }
        if let Some(caps) = &self.capacities {
            check_dim("cournot capacities", n, caps.len())?;
            if caps.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(Error::InvalidProblem("capacities must be finite and >= 0".into()));
            }
        }
        if let Some(c) = self.shared_capacity {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidProblem("shared capacity must be finite and >= 0".into()));
            }
        }
        self.scenarios.validate()?;
        let curve = self.curve(self.smoothing);
        curve.validate()?;
        if self.smoothing > 0.0 && self.breakpoints.first().is_some_and(|b| *b <= self.smoothing) {
            return Err(Error::InvalidProblem(
                "the first smoothing window must lie in X > 0".into(),
            ));
        }
        // Coefficients are affine in ω, so positivity on the corners of the
        // support covers the whole support.
        for omega in self.scenarios.support_corners() {
            let w = omega.as_slice();
            if !(self.intercept.eval(w) > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "price intercept is not positive at omega = {w:?}"
                )));
            }
            if let Some(j) = self.slopes.iter().position(|b| !(b.eval(w) > 0.0)) {
                return Err(Error::InvalidProblem(format!(
                    "price slope b^{} is not positive at omega = {w:?}; the price must decrease",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// `p(·;ω)` as a curve of the aggregate output.
    pub fn curve(&self, smoothing: f64) -> PiecewiseCurve {
        PiecewiseCurve {
            breakpoints: self.breakpoints.clone(),
            intercept: self.intercept.clone(),
            slopes: self
                .slopes
                .iter()
                .map(|b| OmegaAffine::new(-b.base, b.omega.iter().map(|c| -c).collect()))
                .collect(),
            smoothing,
        }
    }

    /// `p(X;ω)` without smoothing.
    pub fn price(&self, x_total: f64, omega: &[f64]) -> f64 {
        self.curve(0.0).value(x_total, omega)
    }

    fn ground_set(&self) -> Result<GroundSet> {
        match &self.capacities {
            Some(c) => GroundSet::new_box(vec![0.0; self.firms()], c.clone()),
            None => Ok(GroundSet::orthant(self.firms())),
        }
    }

    fn moving_set(&self) -> Option<MovingSet> {
        self.shared_capacity.map(|c| {
            let n = self.firms();
            let matrix = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { -1.0 });
            MovingSet::AffineBox {
                lower: None,
                upper: Some(AffineMap::new(matrix, DVector::from_element(n, c)).expect("square")),
            }
        })
    }

    fn instance(&self, map: ScenarioMap) -> Result<ProblemInstance> {
        let set = self.ground_set()?;
        match self.moving_set() {
            Some(m) => ProblemInstance::new_sqvi(set, m, map, self.scenarios.clone()),
            None => ProblemInstance::new(ProblemKind::Svi, set, map, self.scenarios.clone()),
        }
    }
}

fn curve_expr(curve: &PiecewiseCurve, part: CurvePart, n: usize) -> Expr {
    Expr::Curve {
        curve: curve.clone(),
        part,
        arg: Box::new(Expr::var_sum(n)),
    }
}

/// `γ_i x_i + δ_i − p(X)`.
fn marginal_cost_minus_price(cfg: &CournotConfig, curve: &PiecewiseCurve, i: usize) -> Vec<Expr> {
    let n = cfg.firms();
    vec![
        Expr::scaled(cfg.gamma[i], Expr::Var(i)),
        Expr::Const(cfg.delta[i]),
        Expr::scaled(-1.0, curve_expr(curve, CurvePart::Value, n)),
    ]
}

/// Builds the interval-valued game and its smoothing. A shared capacity
/// makes both instances SQVI.
pub fn build_cournot(config: &CournotConfig) -> Result<CournotInstances> {
    config.validate()?;
    let n = config.firms();
    let sharp = config.curve(0.0);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let side = |s: Side| Expr::Product(vec![Expr::Var(i), curve_expr(&sharp, CurvePart::Slope(s), n)]);
        let hi_term = Expr::Max(vec![side(Side::Left), side(Side::Right)]);
        let lo_term = Expr::Min(vec![side(Side::Left), side(Side::Right)]);
        let mut lo = marginal_cost_minus_price(config, &sharp, i);
        lo.push(Expr::scaled(-1.0, hi_term));
        let mut hi = marginal_cost_minus_price(config, &sharp, i);
        hi.push(Expr::scaled(-1.0, lo_term));
        lower.push(Expr::Sum(lo));
        upper.push(Expr::Sum(hi));
    }
    let interval = config.instance(ScenarioMap::IntervalValued(IntervalMap { lower, upper }))?;

    let smooth = config.curve(config.smoothing);
    let components = (0..n)
        .map(|i| {
            let mut terms = marginal_cost_minus_price(config, &smooth, i);
            terms.push(Expr::scaled(
                -1.0,
                Expr::Product(vec![Expr::Var(i), curve_expr(&smooth, CurvePart::Slope(Side::Left), n)]),
            ));
            Expr::Sum(terms)
        })
        .collect();
    let smoothed = config.instance(ScenarioMap::Smooth(SmoothMap { components }))?;
    Ok(CournotInstances { interval, smoothed })
}

/// Clarke generalized gradient of the unsmoothed price at `X`: a
/// singleton inside segments, the hull of the two slopes at a breakpoint.
pub fn price_clarke_interval(config: &CournotConfig, x_total: f64, omega: &[f64]) -> Result<(f64, f64)> {
    if !(x_total >= 0.0) {
        return Err(Error::config("X", "aggregate output must be nonnegative"));
    }
    Ok(config.curve(0.0).slope_interval(x_total, omega))
}

/// Evaluates `q_j = inf_{w ∈ Φ(x;ω)} wᵀ(x − x_ref) / ‖x‖` along
/// `x = x_ref + r_j d`. A scenario passes when `q` increases over the last
/// three radii and exceeds `threshold` at the largest one.
pub fn cournot_growth_probe(
    config: &CournotConfig,
    x_ref: &DVector<f64>,
    direction: &DVector<f64>,
    radii: &[f64],
    threshold: f64,
    seed: u64,
) -> Result<CertificateReport> {
    let inst = build_cournot(config)?;
    let p = &inst.interval;
    check_dim("x_ref", p.dim, x_ref.len())?;
    check_dim("direction", p.dim, direction.len())?;
    if direction.iter().any(|d| *d < 0.0) || !(direction.norm() > 0.0) {
        return Err(Error::config("direction", "must be a nonzero vector in the nonnegative orthant"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::config("radii", "radii must be positive and strictly increasing"));
    }
    let d = direction.normalize();
    let params = serde_json::json!({
        "x_ref": x_ref.as_slice(),
        "direction": d.as_slice(),
        "radii": radii,
        "threshold": threshold,
        "seed": seed,
    });
    let mut report = CertificateReport::new("cournot-growth", params);
    let mut witnesses = Vec::new();
    for sc in certificate_scenarios(&p.scenarios, DEFAULT_SCENARIO_DRAWS, seed) {
        let mut values = Vec::with_capacity(radii.len());
        for &r in radii {
            let x = x_ref + &d * r;
            let (lo, hi) = p.map.eval_interval(&x, &sc.omega)?;
            values.push(interval_inf_dot(&lo, &hi, &(&x - x_ref)) / x.norm());
        }
        let last = values.last().copied().unwrap_or(f64::NAN);
        let rising = values.len() >= TAIL_WINDOW
            && values[values.len() - TAIL_WINDOW..].windows(2).all(|w| w[1] > w[0]);
        let verdict = if rising && last > threshold {
            Verdict::Pass
        } else if values.len() >= TAIL_WINDOW && !rising {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        witnesses.push((verdict == Verdict::Fail).then(|| Witness {
            scenario: Some(sc.index),
            omega: Some(sc.omega.as_slice().to_vec()),
            direction: Some(d.as_slice().to_vec()),
            radius: radii.last().copied(),
            value: last,
            ..Witness::default()
        }));
        report.evidence.push(Evidence {
            scenario: sc.index,
            direction: Some(0),
            anchor: None,
            tail_min: last,
            tail_slope: tail_slope(&values),
            values,
            verdict,
        });
    }
    Ok(report.finish(witnesses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_continuous() {
        let c = CournotConfig::two_firm_default();
        c.validate().unwrap();
        for w in [[1.0, 1.0], [-1.0, -1.0]] {
            let left = c.price(6.0 - 1e-12, &w);
            let right = c.price(6.0 + 1e-12, &w);
            assert!((left - right).abs() <= 1e-9);
        }
        // a¹ − 6 b¹ with ω = (1, 1): 32 − 6·2.2
        assert!((c.price(6.0, &[1.0, 1.0]) - 18.8).abs() < 1e-12);
    }

    #[test]
    fn clarke_interval_cases() {
        let c = CournotConfig::two_firm_default();
        let w = [1.0, 1.0];
        assert_eq!(price_clarke_interval(&c, 3.0, &w).unwrap(), (-2.2, -2.2));
        assert_eq!(price_clarke_interval(&c, 8.0, &w).unwrap(), (-1.1, -1.1));
        assert_eq!(price_clarke_interval(&c, 6.0, &w).unwrap(), (-2.2, -1.1));
        assert!(price_clarke_interval(&c, -1.0, &w).is_err());
    }

    #[test]
    fn zero_slope_rejected() {
        let mut c = CournotConfig::two_firm_default();
        c.slopes[1] = OmegaAffine::constant(0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn monopoly_map() {
        let c = CournotConfig {
            gamma: vec![0.0],
            delta: vec![2.0],
            breakpoints: vec![],
            intercept: OmegaAffine::constant(10.0),
            slopes: vec![OmegaAffine::constant(1.5)],
            capacities: None,
            shared_capacity: None,
            smoothing: 0.0,
            scenarios: ScenarioModel::single(vec![]),
        };
        let inst = build_cournot(&c).unwrap();
        let o = DVector::zeros(0);
        let x = DVector::from_element(1, 4.0);
        // δ − a + 2 b x
        assert_eq!(inst.smoothed.eval_map(&x, &o).unwrap()[0], 2.0 - 10.0 + 12.0);
    }

    #[test]
    fn shared_capacity_gives_sqvi() {
        let mut c = CournotConfig::two_firm_default();
        c.shared_capacity = Some(8.0);
        c.smoothing = 0.5;
        let inst = build_cournot(&c).unwrap();
        assert_eq!(inst.smoothed.kind, ProblemKind::Sqvi);
        let k = inst.smoothed.feasible_set_at(&DVector::from_column_slice(&[3.0, 2.0])).unwrap();
        assert_eq!(k.bounds().1, DVector::from_column_slice(&[6.0, 5.0]));
    }
}
