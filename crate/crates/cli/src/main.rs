//! `crowdsim`: run simulations and write their outputs as flat CSV/JSON files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crowdsim_core::metrics::Matching;

#[derive(Parser)]
#[command(name = "crowdsim", version, about = "Antagonistic crowd simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, short)]
    scenario: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, short)]
    out: PathBuf,
    /// Override the scenario's tick limit.
    #[arg(long)]
    max_ticks: Option<u32>,
}

#[derive(Args)]
struct Parallel {
    /// Number of runs.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Seed of the first run; run i uses base_seed + i. Defaults to the
    /// scenario's seed.
    #[arg(long)]
    base_seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write series, trace, heat maps and metrics.
    Run {
        #[command(flatten)]
        common: Common,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write a heat map every K ticks; 0 disables them.
        #[arg(long, default_value_t = 5)]
        heatmap_every: u32,
    },
    /// Run many seeds and write averaged series with standard deviations.
    Batch {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        parallel: Parallel,
    },
    /// Run one batch per value of a scenario parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        parallel: Parallel,
        /// One of n_cops, pr, a, b.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
    /// Compare the dominant paths of two traces.
    Compare {
        trace_a: PathBuf,
        trace_b: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "greedy")]
        matching: MatchingArg,
        /// Cells within this distance join the same group.
        #[arg(long, default_value_t = 1.5)]
        link_radius: f64,
        /// Smallest group that forms a path.
        #[arg(long, default_value_t = 3)]
        min_group: usize,
    },
    /// Regenerate a bundle from its manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MatchingArg {
    Greedy,
    Exhaustive,
}

impl From<MatchingArg> for Matching {
    fn from(m: MatchingArg) -> Self {
        match m {
            MatchingArg::Greedy => Matching::Greedy,
            MatchingArg::Exhaustive => Matching::Exhaustive,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, seed, heatmap_every } => {
            commands::run(&common.scenario, &common.out, common.max_ticks, seed, heatmap_every)
        }
        Command::Batch { common, parallel } => commands::batch(
            &common.scenario,
            &common.out,
            common.max_ticks,
            parallel.runs,
            parallel.base_seed,
            parallel.jobs,
        ),
        Command::Sweep { common, parallel, param, values } => commands::sweep(
            &common.scenario,
            &common.out,
            common.max_ticks,
            &param,
            &values,
            parallel.runs,
            parallel.base_seed,
            parallel.jobs,
        ),
        Command::Compare { trace_a, trace_b, out, matching, link_radius, min_group } => {
            commands::compare(&trace_a, &trace_b, out.as_deref(), matching.into(), link_radius, min_group)
        }
        Command::Replay { manifest, out } => commands::replay(&manifest, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
