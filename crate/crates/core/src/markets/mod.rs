//! Generators and verifiers for two equilibrium models: a Nash-Cournot game
//! with a piecewise-affine inverse demand, and a networked power market
//! posed as a mixed complementarity problem.

pub mod cournot;
pub mod power;

pub use cournot::{
    build_cournot, cournot_growth_probe, price_clarke_interval, CournotConfig, CournotInstances,
};
pub use power::{
    build_power_market, power_market_u_bound, power_market_u_expr, sample_feasible_points, verify_equilibrium,
    EquilibriumReport, PowerLayout, PowerNetworkConfig,
};
