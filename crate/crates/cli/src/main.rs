use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ldp_distance::analysis::{HistogramSpec, UnreachablePolicy};
use ldp_distance::graph::LoadOptions;
use ldp_distance::harness::{
    cmd_simulate, cmd_stats, load_dataset, run_trials, sweep_dataset, write_records, ExperimentConfig, Method,
    SimulateConfig, SimulationMode,
};
use ldp_distance::mechanisms::{RngStream, StreamRole};
use ldp_distance::neigh_agg::{run_neigh_agg_observed, write_round_snapshot};

#[derive(Parser)]
#[command(name = "ldp-distance", version, about = "Distance estimation under edge local differential privacy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method for `--repeats` trials and print per-trial metrics.
    Run(RunArgs),
    /// Run a method over a budget grid (and optionally a T grid).
    Sweep(SweepArgs),
    /// Simulate the estimator models Y1, Y2 or the min-of-Laplace table.
    Simulate(SimulateArgs),
    /// Print n, m, density, minimum degree and the round bound of a dataset.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list, one `u v` pair per line; `#` starts a comment.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Treat lines as arcs and symmetrize.
    #[arg(long)]
    directed: bool,
    /// Use the complement of the loaded graph.
    #[arg(long)]
    complement: bool,
    /// Keep only the largest connected component.
    #[arg(long)]
    largest_component: bool,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Label for the dataset column.
    #[arg(long)]
    name: Option<String>,
    /// graph-agg-and, graph-agg-and-or, rnl, neigh-agg-laplace or neigh-agg-rr.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long, allow_negative_numbers = true)]
    eps1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eps2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// Distance threshold [default: 6].
    #[arg(long = "T")]
    threshold: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// How pairs without a true path are scored: cap or exclude.
    #[arg(long)]
    unreachable: Option<UnreachablePolicy>,
    /// Leave runtime_ms empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Directory for cached exact distance matrices.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Write every round of trial 0's distance vectors to this file
    /// (neighbor aggregation only).
    #[arg(long)]
    dump_rounds: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        let g = &self.graph;
        if g.dataset.is_some() {
            config.dataset.clone_from(&g.dataset);
        }
        config.directed |= g.directed;
        config.complement |= g.complement;
        config.largest_component |= g.largest_component;
        config.timing &= !self.no_timing;
        macro_rules! take {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = &self.$field { config.$target = v.clone().into(); })*
            };
        }
        take!(name => dataset_name, eps1 => eps1, eps2 => eps2, eps => eps, out => out, cache_dir => cache_dir);
        take!(method => method, threshold => threshold, seed => seed, repeats => repeats, unreachable => unreachable);
        Ok(config)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated budgets. Sets eps1 for graph aggregation, eps otherwise.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    /// Comma-separated thresholds to cross with the budget grid.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<u32>>,
}

#[derive(Args)]
struct SimulateArgs {
    /// y1, y2 or min-laplace.
    #[arg(long, default_value = "y2")]
    mode: SimulationMode,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// True distance of the simulated pair.
    #[arg(long, default_value_t = 4)]
    t: u32,
    #[arg(long = "T", default_value_t = 6)]
    threshold: u32,
    #[arg(long, default_value_t = 1_000)]
    repeats: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit counts a1,a2,a3; requires --hop-counts.
    #[arg(long, value_delimiter = ',', requires = "hop_counts")]
    near_counts: Option<Vec<u64>>,
    /// Explicit counts m_1,...,m_(T-1); requires --near-counts.
    #[arg(long, value_delimiter = ',', requires = "near_counts")]
    hop_counts: Option<Vec<u64>>,
    /// Variable counts for min-laplace.
    #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
    min_n: Vec<usize>,
    /// Laplace scale for min-laplace.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Monte Carlo trials for min-laplace.
    #[arg(long, default_value_t = 1_000_000)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    graph: GraphArgs,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: &RunArgs) -> Result<()> {
    let config = args.config()?;
    config.validate()?;
    let (dataset, report) = load_dataset(&config)?;
    eprintln!("{report}");
    if let Some(path) = &args.dump_rounds {
        if config.method.is_graph_based() {
            bail!("--dump-rounds needs a neighbor aggregation method");
        }
        let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        let rng = RngStream::from_seed(config.seed).substream(StreamRole::Trial, 0);
        run_neigh_agg_observed(&dataset.graph, &config.privacy_params(), &rng, |k, vectors| {
            write_round_snapshot(k, vectors, &mut out)
        })?;
        out.flush()?;
    }
    let records = run_trials(&dataset, &config)?;
    write_records(&records, output(config.out.as_ref())?, config.timing)?;
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let config = args.run.config()?;
    // The grid supplies the varied budget, so only the others must be set.
    config.with_primary_budget(1.0).validate()?;
    let (dataset, report) = load_dataset(&config)?;
    eprintln!("{report}");
    let records = sweep_dataset(&dataset, &config, &args.grid, args.t_grid.as_deref())?;
    write_records(&records, output(config.out.as_ref())?, config.timing)?;
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let histogram = match (&args.near_counts, &args.hop_counts) {
        (Some(a), Some(m)) => {
            let Ok(a) = <[u64; 3]>::try_from(a.as_slice()) else {
                bail!("--near-counts takes exactly three values, got {}", a.len());
            };
            HistogramSpec::Explicit { a, m: m.clone() }
        }
        _ => HistogramSpec::Uniform,
    };
    let config = SimulateConfig {
        mode: args.mode,
        n: args.n,
        t: args.t,
        threshold: args.threshold,
        repeats: args.repeats,
        eps_grid: args.eps_grid.clone(),
        seed: args.seed,
        histogram,
        min_laplace_n: args.min_n.clone(),
        laplace_scale: args.b,
        monte_carlo_trials: args.trials,
    };
    cmd_simulate(&config)?.write_csv(output(args.out.as_ref())?)?;
    Ok(())
}

fn stats(args: &StatsArgs) -> Result<()> {
    let g = &args.graph;
    let Some(path) = &g.dataset else { bail!("stats needs --dataset") };
    let options =
        LoadOptions { directed: g.directed, take_complement: g.complement, largest_component: g.largest_component };
    let (stats, report) = cmd_stats(path, options)?;
    eprintln!("{report}");
    stats.write_csv(io::stdout().lock())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Simulate(args) => simulate(args),
        Command::Stats(args) => stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
