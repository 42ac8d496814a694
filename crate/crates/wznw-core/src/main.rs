//! Command-line driver: loads a run configuration, executes its tasks, and
//! prints the summary.  Exit status 0 means every task passed, 1 means at
//! least one verification failed, 2 means the configuration was rejected or
//! a file could not be written.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use wznw_core::config::{self, Overrides};
use wznw_core::runner;

#[derive(Parser)]
#[command(
    name = "wznw",
    version,
    about = "Exact and high-precision checks for current-algebra conformal models"
)]
struct Cli {
    /// Run configuration file (sections [fuse], [blocks], [connect],
    /// [monodromy], [verify-assoc], [verify-npoint], [voa-check]).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Working precision in decimal digits for floating-point tasks.
    #[arg(long, value_name = "N")]
    precision: Option<usize>,

    /// Series truncation order for local expansions.
    #[arg(long, value_name = "M")]
    series_order: Option<usize>,

    /// Module truncation depth for algebraic checks.
    #[arg(long, value_name = "D")]
    depth: Option<usize>,

    /// Directory for output artifacts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run independent tasks concurrently (outputs are unchanged).
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let over = Overrides {
        precision: cli.precision,
        series_order: cli.series_order,
        depth: cli.depth,
        out: cli.out,
        parallel: cli.parallel,
    };
    let rc = match config::load(&cli.config, &over) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match runner::run(&rc) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
