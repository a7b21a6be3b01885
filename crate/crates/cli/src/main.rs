//! `stochvi`: generate market instances, solve problem files, run
//! solvability certificates and the small-LCP oracle.
//!
//! Exit codes: 0 ok or PASS, 2 input error, 3 iteration limit, 4 diverged,
//! 5 FAIL, 6 INCONCLUSIVE.

mod cli;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use commands::{Context, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("the global pool is configured once");
    }
    let ctx = Context::new(&cli);
    let result = match &cli.command {
        Command::Generate(a) => commands::generate::run(&ctx, a),
        Command::Solve(a) => commands::solve::run(&ctx, a),
        Command::Certify(a) => commands::certify::run(&ctx, a),
        Command::Oracle(a) => commands::oracle::run(&ctx, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
