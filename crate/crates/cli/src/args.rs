use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use opsplit::datagen::Benchmark;
use opsplit::search::Strategy;
use opsplit::Scheme;
use serde::Serialize;

fn benchmark(s: &str) -> Result<Benchmark, String> {
    s.parse().map_err(|e: opsplit::Error| e.to_string())
}

fn strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: opsplit::Error| e.to_string())
}

fn scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: opsplit::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "opsplit", version, about = "Operator-splitting search over dictionaries of single-physics flows")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Output directory.
    #[arg(long, global = true, env = "OPSPLIT_OUT", default_value = "opsplit-out")]
    pub out: PathBuf,
    /// Worker threads for parallel evaluation and generation (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate reference trajectories and a manifest.
    Generate(GenerateArgs),
    /// Search a dictionary for the subset that best explains a context window.
    Search(SearchArgs),
    /// Roll a chosen subset forward and score it against held-out frames.
    Rollout(RolloutArgs),
    /// Search, identify coefficients and evaluate rollouts for many trajectories.
    Identify(IdentifyArgs),
    /// Budget curves of beam and uniform search on the same context.
    Scaling(ScalingArgs),
    /// Composed splitting error versus perturbed constituent operators.
    WeakestLink(WeakestLinkArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_parser = benchmark)]
    pub benchmark: Benchmark,
    /// Number of trajectories; trajectory `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Coefficients, e.g. `c=0.5,D=0.3`; defaults depend on the benchmark.
    #[arg(long)]
    pub mu: Option<String>,
    /// Frames per trajectory (benchmark default if omitted).
    #[arg(long)]
    pub frames: Option<usize>,
    /// Grid points per axis (benchmark default if omitted).
    #[arg(long)]
    pub points: Option<usize>,
}

/// Data and dictionary inputs shared by the search-based commands.
#[derive(Debug, Args, Serialize)]
pub struct Inputs {
    /// Benchmark presets to use; inferred from the trajectory header if omitted.
    #[arg(long, value_parser = benchmark)]
    pub benchmark: Option<Benchmark>,
    /// Dictionary specification (TOML); the benchmark preset if omitted.
    #[arg(long)]
    pub dict: Option<PathBuf>,
    /// Context length L.
    #[arg(long, default_value_t = 16)]
    pub context_len: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchOptions {
    #[arg(long, value_parser = strategy, default_value = "beam")]
    pub strategy: Strategy,
    /// Uniform-search trials (benchmark default if omitted).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Beam width B (benchmark default if omitted).
    #[arg(long)]
    pub beam_width: Option<usize>,
    /// Maximum composition length M (4 for uniform, 5 for beam if omitted).
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Relative improvement below which beam search stops.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    #[arg(long, value_parser = scheme, default_value = "strang")]
    pub scheme: Scheme,
    /// Evaluate every subset in ascending id order.
    #[arg(long)]
    pub canonical_order: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    /// Trajectory file providing the context.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct RolloutArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub inputs: Inputs,
    /// Search report whose best subset is rolled out.
    #[arg(long, conflicts_with = "ids", required_unless_present = "ids")]
    pub report: Option<PathBuf>,
    /// Comma-separated dictionary ids to roll out instead of a report.
    #[arg(long, value_delimiter = ',')]
    pub ids: Option<Vec<usize>>,
    /// Splitting scheme for `--ids` (a report carries its own).
    #[arg(long, value_parser = scheme, default_value = "strang")]
    pub scheme: Scheme,
    /// Rollout horizon H (benchmark default if omitted).
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentifyArgs {
    /// Trajectory files to evaluate.
    #[arg(long, num_args = 1.., required = true)]
    pub data: Vec<PathBuf>,
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchOptions,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Report one NRMSE over the whole predicted block instead of the per-step mean.
    #[arg(long)]
    pub block: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    /// Trajectory file; the built-in advection-diffusion task if omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub inputs: Inputs,
    /// Coefficient grid spacing of the built-in task's dictionary.
    #[arg(long, default_value_t = 0.05)]
    pub spacing: f64,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub beam_width: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    #[arg(long, value_parser = scheme, default_value = "strang")]
    pub scheme: Scheme,
}

#[derive(Debug, Args, Serialize)]
pub struct WeakestLinkArgs {
    #[arg(long, default_value_t = 0.1)]
    pub diffusivity: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dispersion: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Rollout length for the `split_rollout` column.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Perturbation magnitudes swept for each operator.
    #[arg(long, value_delimiter = ',', default_value = "0,0.001,0.01,0.1")]
    pub eps: Vec<f64>,
}
