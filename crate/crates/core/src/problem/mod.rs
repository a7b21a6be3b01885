//! Sets, scenario spaces, scenario maps and problem instances.

pub mod expectation;
pub mod expr;
pub mod instance;
pub mod map;
pub mod residual;
pub mod scenario;
pub mod set;

pub use expectation::{expected_map, AveragedMap, DeterministicMap, ExpectationEstimate, ExpectationMode, FnMap};
pub use expr::{CurvePart, Expr, OmegaAffine, PiecewiseCurve, Side};
pub use instance::{ProblemInstance, ProblemKind};
pub use map::{IntervalMap, RandomAffine, ScenarioMap, Selector, SmoothMap};
pub use residual::{best_selection_residual, fb_residual, fb_system, natural_residual, phi_fb, phi_fb_smoothed, SOLUTION_TOL};
pub use scenario::{certificate_scenarios, sample_scenarios, CoordinateDist, Outcome, ScenarioModel, WeightedScenario};
pub use set::{AffineMap, ConeComponent, GroundSet, MovingSet};
