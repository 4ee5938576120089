use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mprecon::experiment::{
    emit_report, run_experiment, write_atomic, CellsExpr, Command, ExperimentConfig, Format,
    RetryPolicy, Rounds, Workload,
};
use mprecon::netsim::{gen_gnp, Graph, RelayMode};

#[derive(Parser)]
#[command(
    name = "mprecon",
    version,
    about = "Multi-party set reconciliation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Two parties reconcile random sets with a fixed difference.
    Two(RunArgs),
    /// n parties reconcile random sets through a broadcasting relay.
    Nparty(RunArgs),
    /// Relay star with distinct singleton sets.
    Relay(RunArgs),
    /// Aggregation over a random rooted tree.
    Tree(RunArgs),
    /// PUSH-PULL gossip over random graphs.
    Gossip(RunArgs),
    /// Every ordered pair exchanges a two-party sketch.
    Pairwise(RunArgs),
    /// Estimate the gossip round count needed to flood a graph.
    Calibrate(RunArgs),
    /// Print a connected G(n, p) sample in the topology file format.
    GenGraph(GenGraphArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetryArg {
    None,
    Double,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelayArg {
    Wired,
    Wireless,
}

#[derive(Args)]
struct RunArgs {
    /// Field characteristic.
    #[arg(long, default_value_t = 1_000_000_007)]
    p: u64,
    /// Checksum range, a power of two.
    #[arg(long, default_value_t = 1 << 32)]
    q: u64,
    /// Hash functions per key (3..=7).
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Table size: an absolute count, `<x>n`, `<x>t` or `auto`.
    #[arg(long)]
    cells: Option<String>,
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    /// Party counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gossip rounds, or `auto` to calibrate per party count.
    #[arg(long, default_value = "auto")]
    rounds: String,
    /// Gossip edge probability, or `auto` for 2 ln n / n.
    #[arg(long, default_value = "auto")]
    edge_prob: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RetryArg::None)]
    retry: RetryArg,
    #[arg(long, value_enum, default_value_t = RelayArg::Wired)]
    relay_mode: RelayArg,
    /// Tag relay and tree sketches with party-id bits.
    #[arg(long)]
    ids: bool,
    /// Flooding completion probability targeted by round calibration.
    #[arg(long, default_value_t = 0.999)]
    target: f64,
    #[arg(long, default_value_t = 1000)]
    calibration_trials: usize,
    /// Keys per party for random-set workloads.
    #[arg(long)]
    set_size: Option<usize>,
    /// Size of the (generalized) set difference for random-set workloads.
    #[arg(long)]
    diff: Option<usize>,
    #[arg(long, default_value_t = 64)]
    key_bits: u32,
    /// Gossip on this fixed graph instead of fresh random graphs.
    #[arg(long)]
    topology: Option<PathBuf>,
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "auto")]
    edge_prob: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_edge_prob(s: &str) -> anyhow::Result<Option<f64>> {
    if s == "auto" {
        return Ok(None);
    }
    let p: f64 = s
        .parse()
        .with_context(|| format!("bad edge probability {s:?}"))?;
    Ok(Some(p))
}

fn build_config(
    command: Command,
    a: RunArgs,
) -> anyhow::Result<(ExperimentConfig, Format, Option<PathBuf>)> {
    let mut cfg = ExperimentConfig::new(command);
    cfg.p = a.p;
    cfg.q = a.q;
    cfg.k = a.k;
    cfg.cells = a
        .cells
        .as_deref()
        .map(str::parse::<CellsExpr>)
        .transpose()?;
    cfg.epsilon = a.epsilon;
    if !a.n.is_empty() {
        cfg.n = a.n;
    }
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.rounds = a.rounds.parse::<Rounds>()?;
    cfg.edge_prob = parse_edge_prob(&a.edge_prob)?;
    cfg.retry = match a.retry {
        RetryArg::None => RetryPolicy::None,
        RetryArg::Double => RetryPolicy::Double,
    };
    cfg.relay_mode = match a.relay_mode {
        RelayArg::Wired => RelayMode::Wired,
        RelayArg::Wireless => RelayMode::Wireless,
    };
    cfg.ids = a.ids;
    cfg.calibration_target = a.target;
    cfg.calibration_trials = a.calibration_trials;
    cfg.workload = Workload {
        set_size: a.set_size,
        diff: a.diff,
        key_bits: a.key_bits,
    };
    if let Some(path) = &a.topology {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let graph = Graph::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.n = vec![graph.vertices()];
        cfg.topology = Some(graph);
    }
    let format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    Ok((cfg, format, a.out))
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("MPRECON_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .with_context(|| format!("MPRECON_THREADS={value:?} is not a thread count"))?;
    if threads == 0 {
        bail!("MPRECON_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    let (command, args) = match cli.command {
        Cmd::Two(a) => (Command::Two, a),
        Cmd::Nparty(a) => (Command::Nparty, a),
        Cmd::Relay(a) => (Command::Relay, a),
        Cmd::Tree(a) => (Command::Tree, a),
        Cmd::Gossip(a) => (Command::Gossip, a),
        Cmd::Pairwise(a) => (Command::Pairwise, a),
        Cmd::Calibrate(a) => (Command::Calibrate, a),
        Cmd::GenGraph(a) => {
            let graph = gen_gnp(a.n, parse_edge_prob(&a.edge_prob)?, a.seed)?;
            std::io::stdout().write_all(graph.to_text().as_bytes())?;
            return Ok(());
        }
    };
    let (cfg, format, out) = build_config(command, args)?;
    let report = run_experiment(&cfg)?;
    let bytes = emit_report(&report, format)?;
    match out {
        Some(path) => {
            write_atomic(&path, &bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}
