//! Experiment harness: configuration, seeded trial execution and report
//! assembly.

mod report;
pub mod workload;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::hashing::derive_seed;
use crate::netsim::{
    calibrate_rounds, calibrate_rounds_gnp, default_edge_prob, gen_gnp, random_tree_with_parties,
    run_gossip, run_pairwise_baseline, run_relay, run_tree, FailureCause, GossipMode, Graph,
    PartyOutcome, PartyReport, RelayMode, SimStats,
};
use crate::protocol::difference_two;
use crate::sketch::{refine_halves, size_for, Sketch, SketchConfig};

pub use report::{emit_report, write_atomic, Format, Report, ReportRow, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Two,
    Nparty,
    Relay,
    Tree,
    Gossip,
    Pairwise,
    Calibrate,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Two,
        Command::Nparty,
        Command::Relay,
        Command::Tree,
        Command::Gossip,
        Command::Pairwise,
        Command::Calibrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Two => "two",
            Command::Nparty => "nparty",
            Command::Relay => "relay",
            Command::Tree => "tree",
            Command::Gossip => "gossip",
            Command::Pairwise => "pairwise",
            Command::Calibrate => "calibrate",
        }
    }
}

/// Table size: absolute, a multiple of the party count (`2n`), a multiple of
/// the difference bound (`1.3t`), or sized from the threshold table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellsExpr {
    Absolute(usize),
    PerParty(f64),
    PerDiff(f64),
    Auto,
}

impl CellsExpr {
    /// Cell count for `n` parties with difference bound `t`.
    pub fn resolve(self, n: usize, t: usize, k: usize, epsilon: f64) -> Result<usize> {
        let scaled = |factor: f64, base: usize| {
            let c = (factor * base as f64).ceil();
            if !(c >= 1.0 && c.is_finite()) {
                return Err(Error::Config(format!("cells expression yields {c}")));
            }
            Ok(c as usize)
        };
        match self {
            CellsExpr::Absolute(m) if m >= 1 => Ok(m),
            CellsExpr::Absolute(_) => Err(Error::Config("cells must be positive".into())),
            CellsExpr::PerParty(f) => scaled(f, n),
            CellsExpr::PerDiff(f) => scaled(f, t),
            CellsExpr::Auto => size_for(t.max(1), k, epsilon, false),
        }
    }
}

impl FromStr for CellsExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad cells expression {s:?}"));
        let factor = |body: &str| -> Result<f64> {
            if body.is_empty() {
                Ok(1.0)
            } else {
                body.parse::<f64>()
                    .ok()
                    .filter(|f| *f > 0.0 && f.is_finite())
                    .ok_or_else(bad)
            }
        };
        let s = s.trim();
        if s == "auto" {
            Ok(CellsExpr::Auto)
        } else if let Some(body) = s.strip_suffix('n') {
            Ok(CellsExpr::PerParty(factor(body)?))
        } else if let Some(body) = s.strip_suffix('t') {
            Ok(CellsExpr::PerDiff(factor(body)?))
        } else {
            s.parse::<usize>()
                .ok()
                .filter(|&m| m > 0)
                .map(CellsExpr::Absolute)
                .ok_or_else(bad)
        }
    }
}

impl fmt::Display for CellsExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellsExpr::Absolute(m) => write!(f, "{m}"),
            CellsExpr::PerParty(x) => write!(f, "{x}n"),
            CellsExpr::PerDiff(x) => write!(f, "{x}t"),
            CellsExpr::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounds {
    Fixed(usize),
    Auto,
}

impl FromStr for Rounds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Rounds::Auto),
            v => v
                .parse()
                .map(Rounds::Fixed)
                .map_err(|_| Error::Config(format!("bad round count {s:?}"))),
        }
    }
}

impl fmt::Display for Rounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rounds::Fixed(r) => write!(f, "{r}"),
            Rounds::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetryPolicy {
    None,
    Double,
}

/// Party sets. Unset sizes fall back to the command's default workload:
/// distinct singletons for the network commands and `(1000, 100)` random
/// sets for `two` and `nparty`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workload {
    pub set_size: Option<usize>,
    pub diff: Option<usize>,
    pub key_bits: u32,
}

impl Default for Workload {
    fn default() -> Self {
        Workload {
            set_size: None,
            diff: None,
            key_bits: 64,
        }
    }
}

const MAX_DOUBLINGS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub p: u64,
    pub q: u64,
    pub k: usize,
    /// `None` picks the command default (`2n` on networks, `auto` otherwise).
    pub cells: Option<CellsExpr>,
    pub epsilon: f64,
    pub n: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub rounds: Rounds,
    /// `None` is `2 ln n / n`.
    pub edge_prob: Option<f64>,
    pub retry: RetryPolicy,
    pub relay_mode: RelayMode,
    /// Tag relay and tree sketches with party-id bits.
    pub ids: bool,
    pub calibration_target: f64,
    pub calibration_trials: usize,
    pub workload: Workload,
    /// Fixed gossip graph used by every trial instead of fresh `G(n, p)`
    /// samples; `n` must equal its vertex count.
    pub topology: Option<Graph>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            p: 1_000_000_007,
            q: 1 << 32,
            k: 4,
            cells: None,
            epsilon: 0.3,
            n: vec![if command == Command::Two { 2 } else { 10 }],
            trials: 100,
            seed: 0,
            rounds: Rounds::Auto,
            edge_prob: None,
            retry: RetryPolicy::None,
            relay_mode: RelayMode::Wired,
            ids: false,
            calibration_target: 0.999,
            calibration_trials: 1000,
            workload: Workload::default(),
            topology: None,
        }
    }

    pub fn cells_expr(&self) -> CellsExpr {
        self.cells.unwrap_or(match self.command {
            Command::Two | Command::Nparty => CellsExpr::Auto,
            _ => CellsExpr::PerParty(2.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        FieldParams::new(self.p, self.q)?;
        if !(3..=7).contains(&self.k) {
            return Err(Error::UnsupportedK(self.k));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n.is_empty() {
            return Err(Error::Config("no party counts given".into()));
        }
        if self.n.contains(&0) {
            return Err(Error::Config("party count must be positive".into()));
        }
        if self.command == Command::Two && self.n.iter().any(|&n| n != 2) {
            return Err(Error::Config(
                "the two-party command runs with n = 2".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidSize(format!("epsilon {}", self.epsilon)));
        }
        if let Some(p) = self.edge_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("edge probability {p}")));
            }
        }
        if !(self.calibration_target > 0.0 && self.calibration_target <= 1.0) {
            return Err(Error::Config(format!(
                "calibration target {}",
                self.calibration_target
            )));
        }
        if let Some(g) = &self.topology {
            if !matches!(self.command, Command::Gossip | Command::Calibrate) {
                return Err(Error::Config(
                    "a topology file only applies to gossip and calibrate".into(),
                ));
            }
            if self.n.iter().any(|&n| n != g.vertices()) {
                return Err(Error::Config(format!(
                    "topology has {} vertices",
                    g.vertices()
                )));
            }
        }
        if !(1..=64).contains(&self.workload.key_bits) {
            return Err(Error::Config(format!(
                "key bits {}",
                self.workload.key_bits
            )));
        }
        Ok(())
    }

    /// Every parameter that can influence results.
    pub fn metadata(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("command", self.command.name().into());
        put("p", self.p.to_string());
        put("q", self.q.to_string());
        put("k", self.k.to_string());
        put("cells", self.cells_expr().to_string());
        put("epsilon", self.epsilon.to_string());
        put(
            "n",
            self.n
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        put("rounds", self.rounds.to_string());
        put(
            "edge_prob",
            self.edge_prob.map_or("auto".into(), |p| p.to_string()),
        );
        put("retry", format!("{:?}", self.retry).to_lowercase());
        put(
            "relay_mode",
            format!("{:?}", self.relay_mode).to_lowercase(),
        );
        put("ids", self.ids.to_string());
        put("calibration_target", self.calibration_target.to_string());
        put("calibration_trials", self.calibration_trials.to_string());
        put(
            "workload.set_size",
            self.workload
                .set_size
                .map_or("default".into(), |s| s.to_string()),
        );
        put(
            "workload.diff",
            self.workload
                .diff
                .map_or("default".into(), |s| s.to_string()),
        );
        put("workload.key_bits", self.workload.key_bits.to_string());
        match &self.topology {
            Some(g) => put(
                "graphs",
                format!(
                    "fixed topology, {} vertices, {} edges",
                    g.vertices(),
                    g.edges().len()
                ),
            ),
            None => put("graphs", "resampled per trial, connected".into()),
        }
        put("version", env!("CARGO_PKG_VERSION").into());
        m
    }
}

/// What one trial contributes to its row.
#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    all: u64,
    miss1: u64,
    missmore: u64,
    messages: u64,
    bits: u64,
    rounds: u64,
    doublings: u64,
    causes: BTreeMap<FailureCause, u64>,
}

impl Tally {
    fn add_party(&mut self, r: &PartyReport) {
        match r.outcome {
            PartyOutcome::AllRecovered => self.all += 1,
            PartyOutcome::MissingOne => self.miss1 += 1,
            PartyOutcome::MissingMany => self.missmore += 1,
            PartyOutcome::Null => {}
        }
        if let Some(c) = r.cause {
            *self.causes.entry(c).or_default() += 1;
        }
    }

    fn from_stats(s: &SimStats) -> Tally {
        let mut t = Tally {
            messages: s.messages,
            bits: s.bits,
            rounds: s.rounds,
            ..Tally::default()
        };
        s.parties.iter().for_each(|r| t.add_party(r));
        t
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.all += other.all;
        self.miss1 += other.miss1;
        self.missmore += other.missmore;
        self.messages += other.messages;
        self.bits += other.bits;
        self.rounds += other.rounds;
        self.doublings += other.doublings;
        for (c, v) in other.causes {
            *self.causes.entry(c).or_default() += v;
        }
        self
    }
}

struct TrialSeeds {
    workload: u64,
    topology: u64,
    protocol: u64,
    position: u64,
    checksum: u64,
}

impl TrialSeeds {
    fn new(trial_seed: u64) -> Self {
        TrialSeeds {
            workload: derive_seed(trial_seed, 0),
            topology: derive_seed(trial_seed, 1),
            protocol: derive_seed(trial_seed, 2),
            position: derive_seed(trial_seed, 3),
            checksum: derive_seed(trial_seed, 4),
        }
    }
}

fn sets_for(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<(Vec<BTreeSet<u64>>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = cfg.workload;
    let random_sets = matches!(cfg.command, Command::Two | Command::Nparty) || w.set_size.is_some();
    if !random_sets {
        return Ok((workload::distinct_singletons(n, w.key_bits, &mut rng)?, n));
    }
    let set_size = w.set_size.unwrap_or(1000);
    let diff = w.diff.unwrap_or(100.min(2 * set_size));
    let sets = if n == 2 {
        workload::two_party(set_size, diff, w.key_bits, &mut rng)?.to_vec()
    } else {
        workload::n_party(n, set_size, diff, w.key_bits, &mut rng)?
    };
    Ok((sets, diff))
}

fn sketch_config(
    cfg: &ExperimentConfig,
    cells: usize,
    seeds: &TrialSeeds,
    ids_width: usize,
) -> Result<SketchConfig> {
    let mut c =
        SketchConfig::with_cells(cfg.p, cfg.q, cfg.k, cells, seeds.position, seeds.checksum)?;
    if cfg.retry == RetryPolicy::Double {
        let sub = c.hash().subtable_size().next_power_of_two();
        c = SketchConfig::with_cells(
            cfg.p,
            cfg.q,
            cfg.k,
            sub * cfg.k,
            seeds.position,
            seeds.checksum,
        )?;
    }
    c.with_ids_width(ids_width)
}

/// One direction of a two-party exchange: `sender` ships its sketch and, on
/// a failed decode under the doubling policy, the odd half of the sketch at
/// twice the size, which the receiver merges with what it already has.
fn two_party_side(
    own: &BTreeSet<u64>,
    sender: &BTreeSet<u64>,
    mut cfg: SketchConfig,
    retry: RetryPolicy,
    tally: &mut Tally,
) -> Result<PartyReport> {
    let truth: BTreeSet<u64> = own | sender;
    let mut received = Sketch::from_keys(cfg, sender, None)?;
    tally.messages += 1;
    tally.bits += received.packed_bits();
    let mut out = difference_two(own, &received)?;
    let mut doublings = 0;
    while !out.complete && retry == RetryPolicy::Double && doublings < MAX_DOUBLINGS {
        cfg = cfg.with_hash(cfg.hash().doubled()?)?;
        let half = Sketch::from_keys(cfg, sender, None)?.odd_half()?;
        tally.messages += 1;
        tally.bits += half.packed_bits();
        received = refine_halves(&received, &half)?;
        out = difference_two(own, &received)?;
        doublings += 1;
    }
    tally.doublings += doublings as u64;
    Ok(PartyReport::evaluate(
        &truth,
        &out.union_of_local,
        out.complete,
        || None,
    ))
}

fn run_trial(cfg: &ExperimentConfig, n: usize, rounds: usize, trial_seed: u64) -> Result<Tally> {
    let seeds = TrialSeeds::new(trial_seed);
    let (sets, t) = sets_for(cfg, n, seeds.workload)?;
    let cells = cfg.cells_expr().resolve(n, t, cfg.k, cfg.epsilon)?;
    let ids_width = if cfg.ids { n } else { 0 };
    match cfg.command {
        Command::Two => {
            let sc = sketch_config(cfg, cells, &seeds, 0)?;
            let mut tally = Tally {
                rounds: 1,
                ..Tally::default()
            };
            let a = two_party_side(&sets[0], &sets[1], sc, cfg.retry, &mut tally)?;
            let b = two_party_side(&sets[1], &sets[0], sc, cfg.retry, &mut tally)?;
            tally.add_party(&a);
            tally.add_party(&b);
            Ok(tally)
        }
        Command::Nparty => {
            let sc = sketch_config(cfg, cells, &seeds, ids_width)?;
            Ok(Tally::from_stats(&run_relay(
                &sets,
                RelayMode::Wireless,
                sc,
            )?))
        }
        Command::Relay => {
            let sc = sketch_config(cfg, cells, &seeds, ids_width)?;
            Ok(Tally::from_stats(&run_relay(&sets, cfg.relay_mode, sc)?))
        }
        Command::Tree => {
            let sc = sketch_config(cfg, cells, &seeds, ids_width)?;
            let tree = random_tree_with_parties(n, seeds.topology)?;
            Ok(Tally::from_stats(&run_tree(&tree, &sets, sc)?))
        }
        Command::Gossip => {
            let sc = sketch_config(cfg, cells, &seeds, 0)?;
            let graph = match &cfg.topology {
                Some(g) => g.clone(),
                None => gen_gnp(n, cfg.edge_prob, seeds.topology)?,
            };
            let stats = run_gossip(
                &graph,
                &sets,
                rounds,
                sc,
                seeds.protocol,
                GossipMode::CoefficientsOnly,
            )?;
            Ok(Tally::from_stats(&stats))
        }
        Command::Pairwise => {
            let sc = sketch_config(cfg, cells, &seeds, 0)?;
            Ok(Tally::from_stats(&run_pairwise_baseline(
                &sets,
                sc,
                cfg.epsilon,
            )?))
        }
        Command::Calibrate => unreachable!("calibration runs no trials"),
    }
}

fn calibrated_rounds(cfg: &ExperimentConfig, n: usize) -> Result<usize> {
    let seed = derive_seed(cfg.seed, u64::MAX - n as u64);
    if let Some(g) = &cfg.topology {
        return Ok(calibrate_rounds(
            g,
            cfg.calibration_target,
            cfg.calibration_trials,
            seed,
        ));
    }
    calibrate_rounds_gnp(
        n,
        cfg.edge_prob,
        cfg.calibration_target,
        cfg.calibration_trials,
        seed,
    )
}

/// Runs every configured party count for `trials` trials each. Trials run in
/// parallel; trial `i` of party count `n` is seeded from the master seed, `n`
/// and `i` alone, so reports are reproducible whatever the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report {
        metadata: cfg.metadata(),
        rows: Vec::new(),
    };
    for &n in &cfg.n {
        if cfg.command == Command::Gossip || cfg.command == Command::Calibrate {
            if n < 2 {
                return Err(Error::Config("gossip needs at least two parties".into()));
            }
            if cfg.topology.is_none() {
                report.metadata.insert(
                    format!("edge_prob.n={n}"),
                    cfg.edge_prob
                        .unwrap_or_else(|| default_edge_prob(n))
                        .to_string(),
                );
            }
        }
        let rounds = match (cfg.command, cfg.rounds) {
            (Command::Calibrate, _) | (Command::Gossip, Rounds::Auto) => calibrated_rounds(cfg, n)?,
            (_, Rounds::Fixed(r)) => r,
            (_, Rounds::Auto) => 0,
        };
        if cfg.command == Command::Calibrate {
            report
                .metadata
                .insert(format!("rounds.n={n}"), rounds.to_string());
            continue;
        }
        let row_seed = derive_seed(cfg.seed, n as u64);
        let tallies = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| run_trial(cfg, n, rounds, derive_seed(row_seed, i)))
            .collect::<Result<Vec<_>>>()?;
        let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
        report.rows.push(ReportRow::from_counts(
            n,
            total.all,
            total.miss1,
            total.missmore,
        ));
        let trials = cfg.trials as f64;
        let mut meta = |key: &str, v: String| report.metadata.insert(format!("{key}.n={n}"), v);
        if cfg.command == Command::Gossip {
            meta("rounds", rounds.to_string());
        }
        meta(
            "messages_per_trial",
            (total.messages as f64 / trials).to_string(),
        );
        meta("bits_per_trial", (total.bits as f64 / trials).to_string());
        if cfg.retry == RetryPolicy::Double {
            meta("doublings", total.doublings.to_string());
        }
        let causes: Vec<String> = total
            .causes
            .iter()
            .map(|(c, v)| format!("{c:?}:{v}"))
            .collect();
        meta(
            "failure_causes",
            if causes.is_empty() {
                "none".into()
            } else {
                causes.join(" ")
            },
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_expressions() {
        assert_eq!("2n".parse::<CellsExpr>().unwrap(), CellsExpr::PerParty(2.0));
        assert_eq!(
            "1.3t".parse::<CellsExpr>().unwrap(),
            CellsExpr::PerDiff(1.3)
        );
        assert_eq!(
            "4096".parse::<CellsExpr>().unwrap(),
            CellsExpr::Absolute(4096)
        );
        assert_eq!("n".parse::<CellsExpr>().unwrap(), CellsExpr::PerParty(1.0));
        assert_eq!("auto".parse::<CellsExpr>().unwrap(), CellsExpr::Auto);
        for bad in ["", "0", "-2n", "xt", "2m", "0n"] {
            assert!(bad.parse::<CellsExpr>().is_err(), "{bad:?}");
        }
        assert_eq!(CellsExpr::PerParty(2.0).resolve(10, 0, 4, 0.1).unwrap(), 20);
        assert_eq!(
            CellsExpr::PerDiff(1.3).resolve(2, 100, 4, 0.1).unwrap(),
            130
        );
        assert_eq!(CellsExpr::Auto.resolve(2, 100, 4, 0.3).unwrap(), 160);
        assert_eq!("2n".parse::<CellsExpr>().unwrap().to_string(), "2n");
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ExperimentConfig::new(Command::Gossip);
        c.p = 1_000_000_006;
        assert_eq!(run_experiment(&c), Err(Error::CompositeP(1_000_000_006)));
        let mut c = ExperimentConfig::new(Command::Gossip);
        c.k = 8;
        assert_eq!(run_experiment(&c), Err(Error::UnsupportedK(8)));
        let mut c = ExperimentConfig::new(Command::Relay);
        c.trials = 0;
        assert!(run_experiment(&c).is_err());
        let mut c = ExperimentConfig::new(Command::Two);
        c.n = vec![3];
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn gossip_report_is_deterministic() {
        let mut c = ExperimentConfig::new(Command::Gossip);
        c.n = vec![10, 20];
        c.trials = 20;
        c.cells = Some(CellsExpr::PerParty(8.0));
        let a = run_experiment(&c).unwrap();
        assert_eq!(a, run_experiment(&c).unwrap());
        for row in &a.rows {
            assert_eq!(row.parties(), row.n as u64 * 20);
        }
        assert!(a.metadata.contains_key("rounds.n=10"));
    }

    #[test]
    fn two_party_retry_recovers() {
        let mut c = ExperimentConfig::new(Command::Two);
        c.trials = 40;
        c.cells = Some(CellsExpr::PerDiff(0.5));
        c.workload.set_size = Some(200);
        c.workload.diff = Some(40);
        let plain = run_experiment(&c).unwrap();
        assert_eq!(plain.rows[0].cnt_all, 0);
        c.retry = RetryPolicy::Double;
        let retried = run_experiment(&c).unwrap();
        assert_eq!(retried.rows[0].cnt_all, 80);
        assert_ne!(retried.metadata["doublings.n=2"], "0");
    }

    #[test]
    fn fixed_topology() {
        let mut c = ExperimentConfig::new(Command::Gossip);
        c.topology = Some(Graph::complete(5));
        c.n = vec![5];
        c.trials = 10;
        c.cells = Some(CellsExpr::PerParty(8.0));
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.rows[0].parties(), 50);
        assert!(r.metadata["graphs"].starts_with("fixed"));
        c.n = vec![6];
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn every_command_runs() {
        for command in Command::ALL {
            let mut c = ExperimentConfig::new(command);
            c.trials = 3;
            c.calibration_trials = 20;
            c.n = vec![if command == Command::Two { 2 } else { 4 }];
            c.workload.set_size = matches!(command, Command::Two | Command::Nparty).then_some(50);
            c.workload.diff = Some(10);
            let r = run_experiment(&c).unwrap();
            if command == Command::Calibrate {
                assert!(r.rows.is_empty());
                assert!(r.metadata.contains_key("rounds.n=4"));
            } else {
                assert_eq!(r.rows.len(), 1, "{command:?}");
            }
        }
    }
}
