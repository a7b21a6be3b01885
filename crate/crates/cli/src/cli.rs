use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "stochvi", version, about = "Stochastic VI/CP models, solvers and solvability certificates")]
pub struct Cli {
    /// Master seed; every random subsystem derives its stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel certificate cells (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the output file here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a problem file from a market configuration.
    Generate(GenerateArgs),
    /// Solve a problem file.
    Solve(SolveArgs),
    /// Run a sampled solvability certificate on a problem file.
    Certify(CertifyArgs),
    /// Enumerate all solutions of a small LCP and test copositivity and R0.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Cournot,
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// The nonsmooth game with an interval-valued map.
    Interval,
    /// The smoothed single-valued game.
    Smoothed,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub config: PathBuf,
    /// Which Cournot instance to write.
    #[arg(long, value_enum, default_value_t = Variant::Interval)]
    pub variant: Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Extragradient,
    Saa,
    Sa,
    Ssn,
    Erm,
    QviFp,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// JSON solver configuration; the flags below override its fields.
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long)]
    pub mu_stages: Option<usize>,
    /// Return the last stochastic approximation iterate instead of the tail average.
    #[arg(long)]
    pub no_averaging: bool,
    /// Starting point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    /// Record the per-iteration residual trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Condition {
    Coercivity,
    Cartesian,
    MonotoneCoercivity,
    LowerBound,
    Multivalued,
    QviBoundary,
    QviCompact,
    ScpGrowth,
    Cocoercive,
    Monotone,
    Alternative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GrowthArg {
    Componentwise,
    InnerProduct,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub condition: Condition,
    /// JSON plan for the condition; the flags below override its fields.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Reference point, comma separated (default: projection of the origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xref: Option<Vec<f64>>,
    /// Ray radii, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Scenario draws for sampler models (finite models use every outcome).
    #[arg(long)]
    pub scenarios: Option<usize>,
    #[arg(long)]
    pub margin: Option<f64>,
    /// Block index for the Cartesian certificate.
    #[arg(long, default_value_t = 0)]
    pub block: usize,
    /// Anchor points of the other blocks for the Cartesian certificate.
    #[arg(long, default_value_t = 4)]
    pub anchors: usize,
    #[arg(long, value_enum, default_value_t = GrowthArg::Componentwise)]
    pub growth: GrowthArg,
    /// JSON file with the lower bound `u(ω)` (default: automatic mode).
    #[arg(long)]
    pub bound: Option<PathBuf>,
    /// Lower corner of the box for the QVI conditions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lower: Option<Vec<f64>>,
    /// Upper corner of the box for the QVI conditions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub upper: Option<Vec<f64>>,
    /// Sample count (boundary points, compactness probes or point pairs).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Candidate point for the co-coercivity interior check, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub candidate: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub lcp: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}
