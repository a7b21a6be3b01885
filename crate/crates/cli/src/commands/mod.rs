pub mod certify;
pub mod generate;
pub mod oracle;
pub mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};
use stochvi::io::files::RunManifest;

use crate::cli::Cli;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_MAX_ITER: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;
pub const EXIT_FAIL: u8 = 5;
pub const EXIT_INCONCLUSIVE: u8 = 6;

/// Any failure that ends a command before it produced a result. Always
/// reported with exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<stochvi::Error> for CliError {
    fn from(e: stochvi::Error) -> Self {
        CliError(e.to_string())
    }
}

pub type CmdResult = Result<u8, CliError>;

pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// The arguments after the program name, used in manifests.
    pub command_line: String,
}

impl Context {
    pub fn new(cli: &Cli) -> Self {
        Self {
            seed: cli.seed,
            out: cli.out.clone(),
            command_line: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
        }
    }

    /// Manifest with SHA-256 digests of `inputs`. Wall-clock time is left
    /// out so that identical runs produce identical files.
    pub fn manifest(&self, inputs: &[&Path]) -> Result<RunManifest, CliError> {
        let mut digests = BTreeMap::new();
        for p in inputs {
            let bytes = read_bytes(p)?;
            digests.insert(p.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        }
        Ok(RunManifest {
            command: self.command_line.clone(),
            config_paths: inputs.iter().map(|p| p.display().to_string()).collect(),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_seconds: None,
            input_digests: digests,
        })
    }

    pub fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError(format!("cannot write to stdout: {e}"))),
        }
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path)?).map_err(|_| CliError(format!("{} is not UTF-8", path.display())))
}

/// Parses a JSON file; errors name the path of the offending field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })
}

pub fn vector(name: &str, values: &[f64], dim: usize) -> Result<nalgebra::DVector<f64>, CliError> {
    if values.len() != dim {
        return Err(CliError(format!("--{name} needs {dim} values, got {}", values.len())));
    }
    Ok(nalgebra::DVector::from_column_slice(values))
}

/// Reads and validates a problem file.
pub fn read_problem(path: &Path) -> Result<stochvi::io::files::ProblemFile, CliError> {
    let _: stochvi::io::files::ProblemFile = read_json(path)?;
    let text = read_text(path)?;
    stochvi::io::files::ProblemFile::parse(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}
