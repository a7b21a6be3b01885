//! Versioned file envelopes for problems, LCP instances and reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::json;
use crate::error::{Error, Result};
use crate::lcp::LcpInstance;
use crate::problem::ProblemInstance;

pub const FORMAT_VERSION: u32 = 1;
pub const PROBLEM_FORMAT: &str = "stochvi-problem";
pub const LCP_FORMAT: &str = "stochvi-lcp";
pub const REPORT_FORMAT: &str = "stochvi-report";

/// Provenance of a generated file or report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_paths: Vec<String>,
    pub seed: u64,
    pub tool_version: String,
    /// Omitted unless explicitly requested, so reports stay bit-stable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    /// SHA-256 of every input file, keyed by path.
    pub input_digests: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub problem: ProblemInstance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
}

impl ProblemFile {
    pub fn new(problem: ProblemInstance, manifest: Option<RunManifest>) -> Self {
        Self {
            format: PROBLEM_FORMAT.into(),
            version: FORMAT_VERSION,
            problem,
            manifest,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: ProblemFile = json::from_str(text)?;
        check_header(&f.format, f.version, PROBLEM_FORMAT)?;
        f.problem.validate()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> Result<String> {
        json::to_canonical_string(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcpFile {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub lcp: LcpInstance,
}

impl LcpFile {
    pub fn new(lcp: LcpInstance) -> Self {
        Self {
            format: LCP_FORMAT.into(),
            version: FORMAT_VERSION,
            lcp,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: LcpFile = json::from_str(text)?;
        check_header(&f.format, f.version, LCP_FORMAT)?;
        f.lcp.validate()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> Result<String> {
        json::to_canonical_string(self)
    }
}

/// A report envelope: `kind` names the body type (`solve`, `certificate`,
/// `oracle`, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile<T> {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub manifest: RunManifest,
    pub body: T,
}

impl<T: Serialize + DeserializeOwned> ReportFile<T> {
    pub fn new(kind: &str, manifest: RunManifest, body: T) -> Self {
        Self {
            format: REPORT_FORMAT.into(),
            version: FORMAT_VERSION,
            kind: kind.into(),
            manifest,
            body,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: ReportFile<T> = json::from_str(text)?;
        check_header(&f.format, f.version, REPORT_FORMAT)?;
        Ok(f)
    }

    pub fn to_text(&self) -> Result<String> {
        json::to_canonical_string(self)
    }
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::config("format", format!("expected `{expected}`, found `{format}`")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::config(
            "version",
            format!("unsupported version {version} (this build reads {FORMAT_VERSION})"),
        ));
    }
    Ok(())
}
