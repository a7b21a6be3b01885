//! On-disk formats and canonical serialization.

pub mod files;
pub mod json;
pub mod serde_helpers;

pub use files::{LcpFile, ProblemFile, ReportFile, RunManifest, FORMAT_VERSION, LCP_FORMAT, PROBLEM_FORMAT, REPORT_FORMAT};
pub use json::{to_canonical_string, CanonicalFormatter};
