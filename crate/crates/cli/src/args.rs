use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use radial_core::config;

#[derive(Debug, Parser)]
#[command(name = "radial", version, about = "Radial solutions of a weighted Hamiltonian elliptic system")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Grid size N
    #[arg(long, global = true, default_value_t = config::GRID_SIZE, value_parser = clap::value_parser!(usize))]
    pub size: usize,
    /// Cutoff radius R
    #[arg(long, global = true, default_value_t = config::CUTOFF)]
    pub cutoff: f64,
    /// Random seed
    #[arg(long, global = true, default_value_t = config::SEED)]
    pub seed: u64,
    /// Output directory for solution files
    #[arg(long, global = true, env = "RADIAL_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads (defaults to one per core)
    #[arg(long, global = true, env = "RADIAL_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the conditions on (n, p, q, a, b) and report the (s, t) split
    Check(SystemFlags),
    /// Weighted radial embedding H^s -> L^q(|x|^c)
    Embed(EmbedArgs),
    /// Search for nontrivial Galerkin solutions and write them as CSV
    Solve(SolveArgs),
    /// Scaling ladder and small-sphere values of the functional
    Geometry(GeometryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemFlags {
    /// Key=value parameter file (keys n, p, q, a, b and optionally s)
    #[arg(long, conflicts_with_all = ["n", "p", "q", "a", "b"])]
    pub config: Option<PathBuf>,
    #[arg(short = 'n', required_unless_present = "config")]
    pub n: Option<u32>,
    #[arg(short = 'p', required_unless_present = "config", allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(short = 'q', required_unless_present = "config", allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(short = 'a', required_unless_present = "config", allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(short = 'b', required_unless_present = "config", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Override the split s (t = 2 - s)
    #[arg(short = 's', long = "split", allow_hyphen_values = true)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedMode {
    Check,
    Constant,
    Sweep,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(value_enum)]
    pub mode: EmbedMode,
    #[arg(short = 'n')]
    pub n: u32,
    #[arg(short = 's', allow_hyphen_values = true)]
    pub s: f64,
    /// Exponent q (check and constant modes)
    #[arg(short = 'q', allow_hyphen_values = true, required_if_eq_any = [("mode", "check"), ("mode", "constant")])]
    pub q: Option<f64>,
    /// Weight exponent c (check and constant modes)
    #[arg(short = 'c', allow_hyphen_values = true, required_if_eq_any = [("mode", "check"), ("mode", "constant")])]
    pub c: Option<f64>,
    /// Comma-separated q values of the sweep grid
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_if_eq("mode", "sweep"))]
    pub qs: Vec<f64>,
    /// Comma-separated c values of the sweep grid
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_if_eq("mode", "sweep"))]
    pub cs: Vec<f64>,
    /// Basis dimension K of the estimator
    #[arg(long, default_value_t = config::BASIS_DIM)]
    pub k: usize,
    /// Write the sweep CSV here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    /// Galerkin dimension k
    #[arg(long, default_value_t = config::BASIS_DIM)]
    pub k: usize,
    /// Number of distinct solutions wanted
    #[arg(long = "count", short = 'D', default_value_t = 1)]
    pub count: usize,
    /// Multi-start budget
    #[arg(long, default_value_t = config::START_BUDGET)]
    pub budget: usize,
    /// Newton tolerance on the gradient sup-norm
    #[arg(long, default_value_t = config::TOLERANCE)]
    pub tol: f64,
    /// Compare each solution with the shooting solver (s = t = 1 only)
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[arg(long, default_value_t = config::BASIS_DIM)]
    pub k: usize,
    /// Sampled states of the scaling ladder
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Rungs lambda = 1, 2, 4, ... of the ladder
    #[arg(long, default_value_t = 40)]
    pub rungs: usize,
    /// Radius of the small sphere in E^+
    #[arg(long, default_value_t = 0.1)]
    pub radius: f64,
    /// Random directions on the small sphere
    #[arg(long, default_value_t = 50)]
    pub directions: usize,
}
