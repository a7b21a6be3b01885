use serde::{Deserialize, Serialize};
use stochvi::io::files::{LcpFile, ReportFile};
use stochvi::lcp::{
    enumerate_lcp_solutions, is_copositive, is_r0_pair, lemke_solve, CopositivityVerdict, Enumeration,
    LemkeOutcome, R0Verdict, DEFAULT_MAX_DEPTH,
};

use super::{read_json, read_text, CliError, CmdResult, Context, EXIT_OK};
use crate::cli::OracleArgs;

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub dim: usize,
    pub tol: f64,
    pub enumeration: Enumeration,
    pub lemke: LemkeOutcome,
    pub copositivity: CopositivityVerdict,
    pub r0: R0Verdict,
}

pub fn run(ctx: &Context, args: &OracleArgs) -> CmdResult {
    let _: LcpFile = read_json(&args.lcp)?;
    let file = LcpFile::parse(&read_text(&args.lcp)?).map_err(|e| CliError(format!("{}: {e}", args.lcp.display())))?;
    let lcp = &file.lcp;
    let enumeration = enumerate_lcp_solutions(lcp, args.tol)?;
    let report = OracleReport {
        dim: lcp.dim(),
        tol: args.tol,
        lemke: lemke_solve(lcp)?,
        copositivity: is_copositive(&lcp.m, DEFAULT_MAX_DEPTH, args.tol),
        r0: is_r0_pair(&lcp.m, args.tol)?,
        enumeration,
    };
    eprintln!(
        "{} isolated solutions, {} degenerate supports; {}; {}",
        report.enumeration.solutions.len(),
        report.enumeration.degenerate.len(),
        report.copositivity.status(),
        if report.r0.is_r0() { "R0" } else { "not R0" }
    );
    let manifest = ctx.manifest(&[&args.lcp])?;
    ctx.emit(&ReportFile::new("oracle", manifest, report).to_text()?)?;
    Ok(EXIT_OK)
}
