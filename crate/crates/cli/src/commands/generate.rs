use serde::{Deserialize, Serialize};
use stochvi::io::files::{ProblemFile, FORMAT_VERSION};
use stochvi::markets::{build_cournot, build_power_market, CournotConfig, PowerNetworkConfig};

use super::{read_json, CliError, CmdResult, Context, EXIT_OK};
use crate::cli::{GenerateArgs, Model, Variant};

pub const MARKET_CONFIG_FORMAT: &str = "stochvi-market-config";

/// Envelope of a market configuration file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfigFile<T> {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub config: T,
}

fn check_envelope<T>(f: &MarketConfigFile<T>, model: &str) -> Result<(), CliError> {
    if f.format != MARKET_CONFIG_FORMAT {
        return Err(CliError(format!(
            "field `format`: expected `{MARKET_CONFIG_FORMAT}`, found `{}`",
            f.format
        )));
    }
    if f.version != FORMAT_VERSION {
        return Err(CliError(format!("field `version`: unsupported version {}", f.version)));
    }
    if f.model != model {
        return Err(CliError(format!("field `model`: expected `{model}`, found `{}`", f.model)));
    }
    Ok(())
}

pub fn run(ctx: &Context, args: &GenerateArgs) -> CmdResult {
    let problem = match args.model {
        Model::Cournot => {
            let f: MarketConfigFile<CournotConfig> = read_json(&args.config)?;
            check_envelope(&f, "cournot")?;
            let instances = build_cournot(&f.config).map_err(|e| CliError(format!("invalid cournot config: {e}")))?;
            match args.variant {
                Variant::Interval => instances.interval,
                Variant::Smoothed => instances.smoothed,
            }
        }
        Model::Power => {
            if args.variant != Variant::Interval {
                return Err(CliError("--variant applies to the cournot model only".into()));
            }
            let f: MarketConfigFile<PowerNetworkConfig> = read_json(&args.config)?;
            check_envelope(&f, "power")?;
            build_power_market(&f.config).map_err(|e| CliError(format!("invalid power config: {e}")))?
        }
    };
    let manifest = ctx.manifest(&[&args.config])?;
    eprintln!("generated {:?} problem of dimension {}", problem.kind, problem.dim);
    ctx.emit(&ProblemFile::new(problem, Some(manifest)).to_text()?)?;
    Ok(EXIT_OK)
}
