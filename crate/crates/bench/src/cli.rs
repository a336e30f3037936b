//! Command-line surface. Every tunable is optional here so that config-file
//! values and built-in defaults can fill the gaps.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rmdp", version, about = "Robust MDP solvers: instance generation, solving, gap checks, sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance JSON file.
    Gen(GenArgs),
    /// Solve one instance and write a report JSON and a trace CSV.
    Solve(SolveArgs),
    /// Certify the duality gap of a (policy, kernel) pair.
    Gap(GapArgs),
    /// Run a Garnet sweep and write an aggregate CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Garnet,
    Machine,
    Healthcare,
}

impl Generator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Generator::Garnet => "garnet",
            Generator::Machine => "machine",
            Generator::Healthcare => "healthcare",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub generator: Generator,
    #[arg(long)]
    pub states: Option<usize>,
    /// Garnet only; the other generators fix A.
    #[arg(long)]
    pub actions: Option<usize>,
    /// Garnet branching factor in (0, 1].
    #[arg(long)]
    pub branch: Option<f64>,
    /// `ellipsoidal` or `kl`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Override the generator's radius rule.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Perturbation samples stored with machine/healthcare instances.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub discount: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; defaults to `<out-dir>/<generator>_s<S>_a<A>_seed<seed>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Solver knobs shared by `solve` and `bench`.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Target accuracy.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// FOM-VI proximal setup: `l2` or `l1`.
    #[arg(long = "norm")]
    pub norm_pair: Option<String>,
    /// FOM-VI weight exponent.
    #[arg(long)]
    pub p: Option<u32>,
    /// FOM-VI epoch-length exponent.
    #[arg(long)]
    pub q: Option<u32>,
    /// Anderson memory.
    #[arg(long)]
    pub memory: Option<usize>,
    /// Epoch cap (FOM-VI) or sweep cap (baselines).
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub max_wall_seconds: Option<f64>,
    /// FOM-VI epochs between gap checks.
    #[arg(long)]
    pub gap_check_period: Option<usize>,
    /// TOML config file; command-line flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; falls back to the config file, then `RMDP_OUT_DIR`, then `.`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// fom_vi, vi, gs_vi, avi or anderson_vi.
    #[arg(long)]
    pub method: Option<String>,
    /// Run seed; defaults to the instance's provenance seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Start FOM-VI from seeded random iterates instead of uniform ones.
    #[arg(long)]
    pub random_init: bool,
    #[arg(long)]
    pub run_id: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// JSON with `policy` and `kernel` fields, e.g. a solve report.
    #[arg(long)]
    pub pair: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Garnet sizes, S = A.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub branch: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}
