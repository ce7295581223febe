//! Flag surface. Precedence: command-line flags, then `CGLMP_*`
//! environment variables, then defaults.

use std::path::PathBuf;

use cglmp::{Side, SolverConfig, DEFAULT_DENSE_CAP};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::record::Format;

#[derive(Debug, Parser)]
#[command(
    name = "cglmp",
    version,
    about = "Maximal quantum violations of the d-dimensional CGLMP inequality"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one (d, side) pair and print a human-readable report.
    Report(ReportArgs),
    /// Sweep a dimension grid and write one record per (d, side).
    Scan(ScanArgs),
    /// Run self-checks; exit 3 if any fails.
    Verify(VerifyArgs),
    /// Print the dense Bell matrix as a debug grid (d <= 64).
    DumpMatrix(DumpMatrixArgs),
}

/// Scan sides; `both` emits positive before negative for each d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideSpec {
    Positive,
    Negative,
    Both,
}

impl SideSpec {
    pub fn sides(self) -> Vec<Side> {
        match self {
            SideSpec::Positive => vec![Side::Positive],
            SideSpec::Negative => vec![Side::Negative],
            SideSpec::Both => vec![Side::Positive, Side::Negative],
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverOpts {
    /// Residual convergence threshold for the power solver.
    #[arg(long, env = "CGLMP_TOL", default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration budget per solve.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    /// Seed for the solver's random start vector.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Largest d stored as an explicit dense matrix; rule-based
    /// operators above it use the structured FFT form.
    #[arg(long, env = "CGLMP_DENSE_CAP", default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
}

impl SolverOpts {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tol,
            max_iterations: self.max_iters,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Dimension, d >= 2.
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value = "positive")]
    pub side: Side,
    /// Also write the record plus Schmidt coefficients as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverOpts,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Dimension grid: `7`, `2:10`, `2:1e6:geometric:40`, or a
    /// comma-separated mix of those; strictly increasing overall.
    #[arg(long)]
    pub d: String,
    #[arg(long, value_enum, default_value_t = SideSpec::Positive)]
    pub side: SideSpec,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write `<out>.states.jsonl` with the Schmidt vector per row.
    #[arg(long)]
    pub states: bool,
    /// Worker cap for solves running in parallel across d.
    #[arg(long, env = "CGLMP_WORKERS")]
    pub workers: Option<usize>,
    /// Keep successful rows already present in the output file and
    /// solve only the missing or failed ones.
    #[arg(long)]
    pub resume: bool,
    /// Log (d, iterations, residual) to stderr every N rows; 0 = off.
    #[arg(long, default_value_t = 0)]
    pub progress: usize,
    #[command(flatten)]
    pub solver: SolverOpts,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Brute-force classical extremes against the closed-form bounds.
    #[arg(long)]
    pub bounds: bool,
    /// Probability path vs closed form vs quadratic form on random
    /// states and phases.
    #[arg(long)]
    pub paths: bool,
    /// Multi-restart phase search against the fixed rules.
    #[arg(long)]
    pub rules: bool,
    /// Largest dimension each selected check runs at. With no check
    /// flags, all checks run.
    #[arg(long, default_value_t = 6)]
    pub d_max: usize,
    /// Random samples per dimension for --paths.
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
    /// Restarts per (d, side) for --rules.
    #[arg(long, default_value_t = 12)]
    pub restarts: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DumpMatrixArgs {
    /// Dimension, 2 <= d <= 64.
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value = "positive")]
    pub side: Side,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
