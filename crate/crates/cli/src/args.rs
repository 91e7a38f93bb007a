use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use routesim_core::models::DEFAULT_PARETO_MIN;
use routesim_core::ModelKind;

use crate::select::NodeSelection;

#[derive(Debug, Parser)]
#[command(
    name = "routesim",
    version,
    about = "Simulate and analyse traceroute-style routes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Metrics and hop statistics of a measured trace file.
    Analyze(AnalyzeArgs),
    /// Route a source/destination selection under one model.
    Simulate(SimulateArgs),
    /// Run a model over several alphas and score them against reference traces.
    Sweep(SweepArgs),
    /// Generate a synthetic topology as an edge list.
    Gen(GenArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Gen(_) => "gen",
            Command::Replay(_) => "replay",
        }
    }
}

/// Flags shared by every command that writes into a directory.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Directory for output files; created if missing.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Worker threads (0 = one per core). Never changes the output.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    /// Report entropies and KL divergences in bits instead of nats.
    #[arg(long)]
    pub log2: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// Trace file: one route per line, whitespace-separated labels.
    pub traces: PathBuf,
    /// Keep only destinations reached from every source.
    #[arg(long)]
    pub common_destinations: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Uspm,
    Ndm,
    Lim,
    Pfm,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Uspm => ModelKind::Uspm,
            ModelArg::Ndm => ModelKind::Ndm,
            ModelArg::Lim => ModelKind::Lim,
            ModelArg::Pfm => ModelKind::Pfm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// Edge-list file of the underlying topology.
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Lower bound L of the PFM weight distribution.
    #[arg(long, default_value_t = DEFAULT_PARETO_MIN)]
    pub pareto_min: f64,
    /// Upper bound M of the PFM weight distribution [default: node count].
    #[arg(long)]
    pub pareto_max: Option<f64>,
    /// `all`, `random:N`, or a comma-separated id list.
    #[arg(long, default_value = "all")]
    pub sources: NodeSelection,
    /// Same syntax as --sources; random picks avoid the chosen sources.
    #[arg(long, default_value = "all")]
    pub destinations: NodeSelection,
    /// Repetitions [default: 100 for pfm, 1 otherwise].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Seed for node selection and PFM weights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Exponent for lim and pfm.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Comma-separated exponents to evaluate.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub alphas: Vec<f64>,
    /// Trace file whose hop distribution is the reference.
    #[arg(long)]
    pub reference: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Ba,
    Er,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Node count.
    #[arg(long)]
    pub n: usize,
    /// Edges per new node (ba).
    #[arg(long)]
    pub m: Option<usize>,
    /// Edge probability (er).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge-list path; the manifest is written next to it.
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A manifest.json written by an earlier run.
    pub manifest: PathBuf,
    /// Output directory (gen: output path) for the replayed run.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}
