//! Command-line surface: subcommands, flags, and their defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Greedy kernel interpolation with a tunable stability restriction.
#[derive(Debug, Parser)]
#[command(name = "stabgreedy", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one greedy interpolation job and write its trace and model.
    Run(RunArgs),
    /// Sweep selection restriction strengths and fit power-decay rates.
    PowerDecay(PowerDecayArgs),
    /// Tabulate accuracy versus restriction strength for the f/P rule
    /// under a condition-number stopping bound.
    FpAccuracy(FpAccuracyArgs),
    /// Select points on an irregular 2-D domain and write the chosen
    /// distributions for several restriction strengths.
    PointDist(PointDistArgs),
}

/// On-disk format for run traces; models and rate reports are always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Kernel as `name[:shape]`, e.g. `linear-matern` or `gaussian:2.5`.
    #[arg(long, default_value = "linear-matern")]
    pub kernel: String,

    /// Selection rule: `p`, `f`, `fp`, or `random`.
    #[arg(long, default_value = "p")]
    pub rule: String,

    /// Restriction strength in [0, 1]; 1 confines selection to the
    /// power-function argmax, 0 disables the restriction.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    /// Space dimension when sampling candidates (ignored for CSV input
    /// unless it disagrees with the file).
    #[arg(long)]
    pub dim: Option<usize>,

    /// Candidate set: a count (sampled uniformly on the unit cube with
    /// `--seed`) or a path to a point-cloud CSV.
    #[arg(long, default_value = "2000")]
    pub candidates: String,

    /// Target: `falpha:<a>`, `inverse-square[:<c0>,<c1>,...]`,
    /// `motivating`, or a path to a values CSV aligned with the
    /// candidate set. Required by the `f` and `fp` rules.
    #[arg(long)]
    pub target: Option<String>,

    /// Hard cap on the number of selected centers.
    #[arg(long, default_value_t = 100)]
    pub max_n: usize,

    /// Stop once the maximal power function drops to this (0 = off).
    #[arg(long, default_value_t = 0.0)]
    pub power_tol: f64,

    /// Stop once the maximal candidate residual drops to this (0 = off).
    #[arg(long, default_value_t = 0.0)]
    pub residual_tol: f64,

    /// Stop once the kernel matrix condition number reaches this bound
    /// (omitting the flag disables the check and its eigensolves).
    #[arg(long)]
    pub cond_bound: Option<f64>,

    /// Evaluate the condition number every this many added centers.
    #[arg(long, default_value_t = 1)]
    pub cond_check_every: usize,

    /// Seed for candidate sampling and the random selection rule.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory; files land under `<out>/run/`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Trace file format.
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    pub format: FileFormat,
}

#[derive(Debug, Args)]
pub struct PowerDecayArgs {
    /// Desk-scale subset: dimension 1 only, 3 seeds, 400 centers.
    #[arg(long)]
    pub quick: bool,

    /// Kernels to sweep (default: basic-matern, linear-matern).
    #[arg(long, value_delimiter = ',')]
    pub kernels: Option<Vec<String>>,

    /// Dimensions to sweep (default: 1, 3, 5).
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,

    /// Restriction strengths to sweep (default: 0.1, 0.2, ..., 1).
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,

    /// Number of selection seeds per grid cell (default: 10).
    #[arg(long)]
    pub seeds: Option<u64>,

    /// Centers per run (default: 800).
    #[arg(long)]
    pub max_n: Option<usize>,

    /// Candidate points per run (default: 30000).
    #[arg(long)]
    pub candidates: Option<usize>,

    /// Output directory; files land under `<out>/power-decay/`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Trace file format.
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    pub format: FileFormat,
}

#[derive(Debug, Args)]
pub struct FpAccuracyArgs {
    /// Desk-scale profile: 10^4 points and condition checks every 10
    /// steps instead of 10^5 points checked every step. Cheaper but not
    /// a like-for-like reproduction of the full protocol.
    #[arg(long)]
    pub quick: bool,

    /// Target smoothness exponents (default: 1.51, 3.5).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,

    /// Restriction strengths (default: 0, 1e-4, 1e-3, 1e-2, 1e-1, 1).
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,

    /// Training points (equal-sized independent test set; overrides the
    /// profile default).
    #[arg(long)]
    pub points: Option<usize>,

    /// Condition-number stopping bound (default: 1e14).
    #[arg(long)]
    pub cond_bound: Option<f64>,

    /// Condition checks every this many steps (overrides the profile).
    #[arg(long)]
    pub cond_check_every: Option<usize>,

    /// Safety cap on centers per run (default: 5000).
    #[arg(long)]
    pub max_n: Option<usize>,

    /// Seed for the train/test clouds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory; files land under `<out>/fp-accuracy/`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Trace file format.
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    pub format: FileFormat,
}

#[derive(Debug, Args)]
pub struct PointDistArgs {
    /// Candidate points sampled on the blob-with-hole domain.
    #[arg(long, default_value_t = 831)]
    pub points: usize,

    /// Centers to select per restriction strength.
    #[arg(long, default_value_t = 50)]
    pub select: usize,

    /// Restriction strengths (default: 0, 0.04, 0.15, 1).
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,

    /// Seed for the domain cloud.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory; files land under `<out>/point-dist/`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Trace file format.
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    pub format: FileFormat,
}
