use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wmfair_core::ModelId;

#[derive(Debug, Parser)]
#[command(name = "wmfair", version, about = "Fair verification of concurrent programs under weak memory models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore all final states of a litmus file and check its expectations.
    Litmus(LitmusArgs),
    /// Decide whether every fair run satisfies a Muller specification.
    Check(CheckArgs),
    /// Bracket the probability that a run satisfies a Muller specification.
    Quant(QuantArgs),
    /// Draw random runs and judge each against a specification.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MachineArgs {
    /// Litmus file.
    pub file: PathBuf,
    /// Memory model; defaults to the `model` line of the file.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelId>,
    /// Maximum number of speculated buffer entries ahead of the pc.
    #[arg(long, default_value_t = 8)]
    pub spec_depth: usize,
    /// Enable the optional forgetting update.
    #[arg(long)]
    pub allow_forget: bool,
    /// Worker threads for exploration; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Stop once this many configurations are stored.
    #[arg(long, default_value_t = 5_000_000)]
    pub max_states: usize,
    /// Print the JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Record wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LitmusArgs {
    #[command(flatten)]
    pub machine: MachineArgs,
    /// Size bound; defaults to the number of locations plus two per
    /// instruction of the longest process (at most eight).
    #[arg(long)]
    pub bound: Option<usize>,
    /// Explore every interleaving instead of one order of independent steps.
    #[arg(long)]
    pub no_reduction: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Muller specification (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Use this bound only instead of searching for a stable one.
    #[arg(long)]
    pub bound: Option<usize>,
    /// First bound of the search; defaults to the number of locations plus two.
    #[arg(long)]
    pub start: Option<usize>,
    /// Consecutive identical graphs required to stop the search.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub window: u64,
    /// Give up the search past this bound.
    #[arg(long, default_value_t = 32)]
    pub max_bound: usize,
    /// Write the connectivity graph in Graphviz format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Print the propagation unit of every witness entry.
    #[arg(long)]
    pub dump_po: bool,
    /// Rejected: fairness cannot be turned off.
    #[arg(long, hide = true)]
    pub unfair: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub machine: MachineArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QuantArgs {
    #[command(flatten)]
    pub machine: MachineArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Width of the probability bracket.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Stop the layer iteration after this many layers.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub machine: MachineArgs,
    /// Muller specification (JSON); without one every run is accepted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Seed of the first run; run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps per run.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Size bound; defaults as for `litmus`.
    #[arg(long)]
    pub bound: Option<usize>,
    /// Print the propagation unit at the end of every run.
    #[arg(long)]
    pub dump_po: bool,
}

fn parse_model(s: &str) -> Result<ModelId, String> {
    s.parse().map_err(|e: wmfair_core::machine::UnknownModel| {
        let names: Vec<&str> = ModelId::ALL.iter().map(|m| m.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}
