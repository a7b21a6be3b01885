//! Stochastic variational inequalities, complementarity problems and
//! quasi-variational inequalities with scenario-based maps.
//!
//! The crate covers modeling ([`problem`]), exact small-scale LCP tools
//! ([`lcp`]), solvers ([`solvers`]), sampled solvability certificates
//! ([`certificates`]) and generators for two market models ([`markets`]).

pub mod certificates;
pub mod error;
pub mod io;
pub mod lcp;
pub mod markets;
pub mod problem;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use lcp::LcpInstance;
pub use problem::{
    expected_map, fb_residual, natural_residual, sample_scenarios, AveragedMap, DeterministicMap,
    ExpectationEstimate, ExpectationMode, GroundSet, MovingSet, ProblemInstance, ProblemKind,
    ScenarioMap, ScenarioModel, Selector,
};
