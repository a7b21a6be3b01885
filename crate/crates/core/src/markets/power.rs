use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problem::{
    certificate_scenarios, AveragedMap, DeterministicMap, Expr, GroundSet, OmegaAffine, ProblemInstance, ProblemKind,
    RandomAffine, ScenarioMap, ScenarioModel,
};
use crate::rng;

/// A transmission-constrained market with Cournot firms.
///
/// Node `i` has inverse demand `a_i(ω) − b_i S_i`, firm `f` at node `i`
/// pays `½κ_{fi} g² + m_{fi}(ω) g` for generation `g ≤ cap_{fi}`, and link
/// `j` carries `Σ_i PDF_{ji} y_i ≤ T_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerNetworkConfig {
    pub nodes: usize,
    pub firms: usize,
    pub link_capacity: Vec<f64>,
    /// Power distribution factors, one row per link.
    pub pdf: Vec<Vec<f64>>,
    pub price_intercept: Vec<OmegaAffine>,
    pub price_slope: Vec<f64>,
    /// `κ_{fi}`, one row per firm.
    pub cost_quadratic: Vec<Vec<f64>>,
    /// `m_{fi}(ω)`, one row per firm.
    pub cost_linear: Vec<Vec<OmegaAffine>>,
    /// `cap_{fi}`, one row per firm.
    pub capacity: Vec<Vec<f64>>,
    pub scenarios: ScenarioModel,
}

/// Positions of the variables `(s, g, μ, η | λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerLayout {
    pub firms: usize,
    pub nodes: usize,
    pub links: usize,
}

impl PowerLayout {
    pub fn s(&self, f: usize, i: usize) -> usize {
        f * self.nodes + i
    }

    pub fn g(&self, f: usize, i: usize) -> usize {
        self.firms * self.nodes + f * self.nodes + i
    }

    pub fn mu(&self, f: usize, i: usize) -> usize {
        2 * self.firms * self.nodes + f * self.nodes + i
    }

    pub fn eta(&self, j: usize) -> usize {
        3 * self.firms * self.nodes + j
    }

    pub fn lambda(&self, f: usize) -> usize {
        self.nonneg_dim() + f
    }

    pub fn nonneg_dim(&self) -> usize {
        3 * self.firms * self.nodes + self.links
    }

    pub fn dim(&self) -> usize {
        self.nonneg_dim() + self.firms
    }
}

impl PowerNetworkConfig {
    /// One node, one firm, no links: `p = 10 − S`, `c(g) = 2g`, cap 100.
    /// The equilibrium is `s = g = 4` with `λ = −2`.
    pub fn monopoly_example() -> Self {
        Self {
            nodes: 1,
            firms: 1,
            link_capacity: vec![],
            pdf: vec![],
            price_intercept: vec![OmegaAffine::constant(10.0)],
            price_slope: vec![1.0],
            cost_quadratic: vec![vec![0.0]],
            cost_linear: vec![vec![OmegaAffine::constant(2.0)]],
            capacity: vec![vec![100.0]],
            scenarios: ScenarioModel::single(vec![]),
        }
    }

    /// Two nodes, two firms, one link of capacity 2 with factors `(0.5, −0.5)`
    /// and a two-point demand shock at node 1.
    pub fn two_node_example() -> Self {
        Self {
            nodes: 2,
            firms: 2,
            link_capacity: vec![2.0],
            pdf: vec![vec![0.5, -0.5]],
            price_intercept: vec![OmegaAffine::new(40.0, vec![4.0]), OmegaAffine::constant(30.0)],
            price_slope: vec![1.0, 0.8],
            cost_quadratic: vec![vec![0.5, 0.4], vec![0.3, 0.6]],
            cost_linear: vec![
                vec![OmegaAffine::constant(5.0), OmegaAffine::constant(6.0)],
                vec![OmegaAffine::new(4.0, vec![0.5]), OmegaAffine::constant(7.0)],
            ],
            capacity: vec![vec![15.0, 10.0], vec![12.0, 8.0]],
            scenarios: ScenarioModel::two_point(vec![1.0], vec![-1.0]),
        }
    }

    /// A random valid network with a two-point demand shock.
    pub fn random(nodes: usize, firms: usize, links: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::STREAM_MARKET);
        let mut u = |lo: f64, hi: f64| r.random_range(lo..hi);
        let pdf = (0..links).map(|_| (0..nodes).map(|_| u(-1.0, 1.0)).collect()).collect();
        Self {
            nodes,
            firms,
            link_capacity: (0..links).map(|_| u(1.0, 10.0)).collect(),
            pdf,
            price_intercept: (0..nodes).map(|_| OmegaAffine::new(u(20.0, 50.0), vec![u(0.0, 5.0)])).collect(),
            price_slope: (0..nodes).map(|_| u(0.5, 2.0)).collect(),
            cost_quadratic: (0..firms).map(|_| (0..nodes).map(|_| u(0.0, 1.0)).collect()).collect(),
            cost_linear: (0..firms)
                .map(|_| (0..nodes).map(|_| OmegaAffine::new(u(1.0, 10.0), vec![u(0.0, 0.5)])).collect())
                .collect(),
            capacity: (0..firms).map(|_| (0..nodes).map(|_| u(0.0, 20.0)).collect()).collect(),
            scenarios: ScenarioModel::two_point(vec![1.0], vec![-1.0]),
        }
    }

    pub fn layout(&self) -> PowerLayout {
        PowerLayout {
            firms: self.firms,
            nodes: self.nodes,
            links: self.link_capacity.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, f, k) = (self.nodes, self.firms, self.link_capacity.len());
        if n == 0 || f == 0 {
            return Err(Error::InvalidProblem("need at least one node and one firm".into()));
        }
        check_dim("pdf rows", k, self.pdf.len())?;
        for row in &self.pdf {
            check_dim("pdf columns", n, row.len())?;
        }
        check_dim("price intercepts", n, self.price_intercept.len())?;
        check_dim("price slopes", n, self.price_slope.len())?;
        for table in [&self.cost_quadratic, &self.capacity] {
            check_dim("firm rows", f, table.len())?;
            for row in table {
                check_dim("node columns", n, row.len())?;
            }
        }
        check_dim("firm rows", f, self.cost_linear.len())?;
        for row in &self.cost_linear {
            check_dim("node columns", n, row.len())?;
        }
        let finite_nonneg = |v: &f64| v.is_finite() && *v >= 0.0;
        if !self.link_capacity.iter().all(finite_nonneg)
            || !self.cost_quadratic.iter().flatten().all(finite_nonneg)
            || !self.capacity.iter().flatten().all(finite_nonneg)
        {
            return Err(Error::InvalidProblem(
                "link capacities, quadratic costs and generation capacities must be >= 0".into(),
            ));
        }
        if self.price_slope.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidProblem("price slopes must be positive".into()));
        }
        if self.pdf.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("distribution factors must be finite".into()));
        }
        self.scenarios.validate()?;
        let d = self.scenarios.omega_dim();
        let coeffs = self.price_intercept.iter().chain(self.cost_linear.iter().flatten());
        if coeffs.clone().any(|c| c.omega.len() > d) {
            return Err(Error::InvalidProblem(format!(
                "coefficients use more than the {d} random coordinates of the scenario model"
            )));
        }
        for omega in self.scenarios.support_corners() {
            let w = omega.as_slice();
            if self.price_intercept.iter().any(|a| !(a.eval(w) > 0.0)) {
                return Err(Error::InvalidProblem(format!("price intercept not positive at omega = {w:?}")));
            }
            if self.cost_linear.iter().flatten().any(|m| !(m.eval(w) >= 0.0)) {
                return Err(Error::InvalidProblem(format!("marginal cost negative at omega = {w:?}")));
            }
        }
        Ok(())
    }

    pub fn total_capacity(&self) -> f64 {
        self.capacity.iter().flatten().sum()
    }
}

fn put_omega(q_omega: &mut DMatrix<f64>, row: usize, c: &OmegaAffine, sign: f64) {
    for (k, v) in c.omega.iter().enumerate() {
        q_omega[(row, k)] += sign * v;
    }
}

/// Assembles the equilibrium conditions as a mixed complementarity problem
/// in `(s, g, μ, η)` (sign constrained) and `λ` (free).
pub fn build_power_market(config: &PowerNetworkConfig) -> Result<ProblemInstance> {
    config.validate()?;
    let l = config.layout();
    let n = l.dim();
    let d = config.scenarios.omega_dim();
    let mut m = DMatrix::zeros(n, n);
    let mut q = DVector::zeros(n);
    let mut q_omega = DMatrix::zeros(n, d);
    for f in 0..l.firms {
        for i in 0..l.nodes {
            let b = config.price_slope[i];
            // s row: b s_fi − a_i(ω) + b S_i + Σ_j η_j PDF_ji − λ_f
            let r = l.s(f, i);
            m[(r, l.s(f, i))] += b;
            for h in 0..l.firms {
                m[(r, l.s(h, i))] += b;
            }
            for j in 0..l.links {
                m[(r, l.eta(j))] += config.pdf[j][i];
            }
            m[(r, l.lambda(f))] -= 1.0;
            q[r] -= config.price_intercept[i].base;
            put_omega(&mut q_omega, r, &config.price_intercept[i], -1.0);

            // g row: κ g + m(ω) − Σ_j η_j PDF_ji + μ_fi + λ_f
            let r = l.g(f, i);
            m[(r, l.g(f, i))] += config.cost_quadratic[f][i];
            for j in 0..l.links {
                m[(r, l.eta(j))] -= config.pdf[j][i];
            }
            m[(r, l.mu(f, i))] += 1.0;
            m[(r, l.lambda(f))] += 1.0;
            q[r] += config.cost_linear[f][i].base;
            put_omega(&mut q_omega, r, &config.cost_linear[f][i], 1.0);

            // μ row: cap − g
            let r = l.mu(f, i);
            m[(r, l.g(f, i))] -= 1.0;
            q[r] += config.capacity[f][i];

            // λ row: Σ_i (s_fi − g_fi)
            let r = l.lambda(f);
            m[(r, l.s(f, i))] += 1.0;
            m[(r, l.g(f, i))] -= 1.0;
        }
    }
    // η row: T_j − Σ_i PDF_ji Σ_h (s_hi − g_hi)
    for j in 0..l.links {
        let r = l.eta(j);
        q[r] += config.link_capacity[j];
        for i in 0..l.nodes {
            for h in 0..l.firms {
                m[(r, l.s(h, i))] -= config.pdf[j][i];
                m[(r, l.g(h, i))] += config.pdf[j][i];
            }
        }
    }
    let map = RandomAffine::with_random_rhs(m, q, q_omega)?;
    ProblemInstance::new(
        ProblemKind::MixedScp,
        GroundSet::mixed(l.nonneg_dim(), l.firms),
        ScenarioMap::RandomAffine(map),
        config.scenarios.clone(),
    )
}

/// `u(ω) = max_i a_i(ω) · Σ cap`, an integrable bound with
/// `xᵀH(x;ω) ≥ −u(ω)` whenever total sales stay below total capacity.
pub fn power_market_u_bound(config: &PowerNetworkConfig, omega: &[f64]) -> f64 {
    let pmax = config
        .price_intercept
        .iter()
        .map(|a| a.eval(omega))
        .fold(f64::NEG_INFINITY, f64::max);
    pmax.max(0.0) * config.total_capacity()
}

/// [`power_market_u_bound`] as an expression in `ω`.
pub fn power_market_u_expr(config: &PowerNetworkConfig) -> Expr {
    let intercepts = config
        .price_intercept
        .iter()
        .map(|a| {
            let mut terms = vec![Expr::Const(a.base)];
            terms.extend(a.omega.iter().enumerate().map(|(k, c)| Expr::scaled(*c, Expr::Omega(k))));
            Expr::Sum(terms)
        })
        .chain(std::iter::once(Expr::Const(0.0)))
        .collect();
    Expr::scaled(config.total_capacity(), Expr::Max(intercepts))
}

/// Random points with `0 ≤ g ≤ cap`, `s ≥ 0` with total sales at most total
/// capacity, `μ ∈ [0, 10]`, `η ∈ [0, 10]` and `λ ∈ [−10, 10]`.
pub fn sample_feasible_points(config: &PowerNetworkConfig, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let l = config.layout();
    let total = config.total_capacity();
    let mut r = rng::task_stream(seed, rng::STREAM_MARKET, 1);
    (0..count)
        .map(|_| {
            let mut x = DVector::zeros(l.dim());
            let mut sales = 0.0;
            for f in 0..l.firms {
                for i in 0..l.nodes {
                    let s = total * r.random::<f64>();
                    x[l.s(f, i)] = s;
                    sales += s;
                    x[l.g(f, i)] = config.capacity[f][i] * r.random::<f64>();
                    x[l.mu(f, i)] = 10.0 * r.random::<f64>();
                }
            }
            if sales > total {
                // Rescale to a random level in [0, total].
                let scale = total * r.random::<f64>() / sales;
                for f in 0..l.firms {
                    for i in 0..l.nodes {
                        x[l.s(f, i)] *= scale;
                    }
                }
            }
            for j in 0..l.links {
                x[l.eta(j)] = 10.0 * r.random::<f64>();
            }
            for f in 0..l.firms {
                x[l.lambda(f)] = r.random_range(-10.0..10.0);
            }
            x
        })
        .collect()
}

/// Residuals of a candidate equilibrium against the expected map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// `max_i |min(x_i, H_i)|` over the sign-constrained block.
    pub complementarity: f64,
    /// `max_i max(0, −x_i, −H_i)` over the sign-constrained block.
    pub infeasibility: f64,
    /// `max_j |H_j|` over the free block.
    pub free_equation: f64,
    /// Largest `|(x,λ)ᵀH(x,λ;ω) − (x,0)ᵀH(x,0;ω)|` over sampled points.
    pub simplification_gap: f64,
    pub ok: bool,
}

const SIMPLIFICATION_TOL: f64 = 1e-10;
const SIMPLIFICATION_SAMPLES: usize = 100;

/// Checks `x` against `E[H(·;ω)]` and the cancellation of the free block
/// in `xᵀH` at seeded random points.
pub fn verify_equilibrium(problem: &ProblemInstance, x: &DVector<f64>, tol: f64) -> Result<EquilibriumReport> {
    let GroundSet::MixedPartition { nonneg_dim, free_dim } = problem.set else {
        return Err(Error::InvalidProblem("equilibrium check needs a mixed complementarity problem".into()));
    };
    check_dim("equilibrium point", problem.dim, x.len())?;
    let h = AveragedMap::reference(problem, 0)?.eval(x);
    let mut comp: f64 = 0.0;
    let mut infeas: f64 = 0.0;
    for i in 0..nonneg_dim {
        comp = comp.max(x[i].min(h[i]).abs());
        infeas = infeas.max(-x[i]).max(-h[i]);
    }
    let free = (nonneg_dim..nonneg_dim + free_dim).map(|j| h[j].abs()).fold(0.0, f64::max);

    let mut r = rng::task_stream(0, rng::STREAM_MARKET, 2);
    let scenarios = certificate_scenarios(&problem.scenarios, SIMPLIFICATION_SAMPLES, 0);
    let mut gap: f64 = 0.0;
    for k in 0..SIMPLIFICATION_SAMPLES {
        let y = DVector::from_fn(problem.dim, |i, _| {
            if i < nonneg_dim {
                r.random_range(0.0..10.0)
            } else {
                r.random_range(-10.0..10.0)
            }
        });
        let mut y0 = y.clone();
        y0.rows_mut(nonneg_dim, free_dim).fill(0.0);
        let omega = &scenarios[k % scenarios.len()].omega;
        let full = y.dot(&problem.eval_map(&y, omega)?);
        let reduced = y0.dot(&problem.eval_map(&y0, omega)?);
        gap = gap.max((full - reduced).abs() / (1.0 + full.abs()));
    }
    Ok(EquilibriumReport {
        complementarity: comp,
        infeasibility: infeas,
        free_equation: free,
        simplification_gap: gap,
        ok: comp <= tol && infeas <= tol && free <= tol && gap <= SIMPLIFICATION_TOL,
    })
}
