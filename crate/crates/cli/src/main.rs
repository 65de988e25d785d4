use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracrelax_cli::{run, Command, RunConfig};

/// Fractional Sobolev-type control experiments: atom-constrained and relaxed
/// solves, the chattering relaxation experiment, self-checks and timings.
#[derive(Debug, Parser)]
#[command(name = "fracrelax", version)]
struct Cli {
    /// Problem file (JSON). Optional for `verify` and `bench`.
    #[arg(long, value_name = "PATH")]
    problem: Option<PathBuf>,
    /// One of solve-p, solve-rp, relax-exp, verify, bench.
    #[arg(long, value_name = "NAME")]
    command: Command,
    /// Control grid cells (at least 2); overrides `solver.grid`.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Ascending chattering block counts, e.g. 4,16,64,256.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// Required bound on the final relaxation gap; overrides `solver.gap_tol`.
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Record wall-clock times in report.csv.
    #[arg(long)]
    timings: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = RunConfig {
        problem: cli.problem,
        command: cli.command,
        grid: cli.grid,
        n_list: cli.n_list,
        seed: cli.seed,
        tol: cli.tol,
        out: cli.out,
        timings: cli.timings,
    };
    match run(&cfg) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
