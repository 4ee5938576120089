use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{connected, Graph, Tree};
use crate::error::{Error, Result};
use crate::hashing::derive_seed;

const MAX_RESAMPLES: usize = 1000;
const MAX_FLOOD_ROUNDS: usize = 1 << 20;

/// Multiplier applied to the measured flooding quantile.
pub const CALIBRATION_SLACK: f64 = 1.5;

/// `2 ln n / n`, capped at 1.
pub fn default_edge_prob(n: usize) -> f64 {
    (2.0 * (n as f64).ln() / n as f64).min(1.0)
}

/// Erdős–Rényi graph `G(n, edge_prob)`, resampled until connected.
pub fn gen_gnp(n: usize, edge_prob: Option<f64>, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::MalformedTopology(format!(
            "G(n, p) needs n >= 2, got {n}"
        )));
    }
    let prob = edge_prob.unwrap_or_else(|| default_edge_prob(n));
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::MalformedTopology(format!("edge probability {prob}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < prob {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        if connected(&adj) {
            return Ok(Graph::from_adj_unchecked(adj));
        }
    }
    Err(Error::DisconnectedAfterRetries(MAX_RESAMPLES))
}

/// Random recursive tree on `vertices` vertices rooted at 0: vertex `v`
/// attaches to a uniform earlier vertex. Every non-root leaf holds a party.
pub fn random_tree(vertices: usize, seed: u64) -> Result<Tree> {
    if vertices < 2 {
        return Err(Error::MalformedTree("need at least two vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (1..vertices).map(|v| (rng.gen_range(0..v), v)).collect();
    let mut has_child = vec![false; vertices];
    for &(u, _) in &edges {
        has_child[u] = true;
    }
    let leaves = (1..vertices).filter(|&v| !has_child[v]).collect();
    Tree::new(vertices, &edges, 0, leaves)
}

/// Tree with exactly `parties` party leaves: a random recursive tree on
/// `parties` internal vertices, each of which gets one party leaf.
pub fn random_tree_with_parties(parties: usize, seed: u64) -> Result<Tree> {
    if parties == 0 {
        return Err(Error::MalformedTree("no parties".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..parties).map(|v| (rng.gen_range(0..v), v)).collect();
    edges.extend((0..parties).map(|v| (v, parties + v)));
    Tree::new(2 * parties, &edges, 0, (parties..2 * parties).collect())
}

/// Rounds of synchronous PUSH-PULL until every vertex has heard from every
/// other vertex.
pub fn flood_rounds(graph: &Graph, rng: &mut impl Rng) -> usize {
    let n = graph.vertices();
    let words = n.div_ceil(64);
    let mut known = vec![0u64; n * words];
    for v in 0..n {
        known[v * words + v / 64] |= 1 << (v % 64);
    }
    let full =
        |known: &[u64], v: usize| (0..n).all(|s| known[v * words + s / 64] >> (s % 64) & 1 == 1);
    let mut rounds = 0;
    while !(0..n).all(|v| full(&known, v)) {
        assert!(rounds < MAX_FLOOD_ROUNDS, "flooding did not finish");
        let old = known.clone();
        for j in 0..n {
            let nb = graph.neighbors(j);
            let u = nb[rng.gen_range(0..nb.len())];
            for w in 0..words {
                known[u * words + w] |= old[j * words + w];
                known[j * words + w] |= old[u * words + w];
            }
        }
        rounds += 1;
    }
    rounds
}

fn quantile_rounds(mut samples: Vec<usize>, target: f64) -> usize {
    samples.sort_unstable();
    let idx = ((target * samples.len() as f64).ceil() as usize).clamp(1, samples.len()) - 1;
    (samples[idx] as f64 * CALIBRATION_SLACK).ceil() as usize
}

/// Smallest round count after which flooding from every source completes in
/// at least a `target` fraction of `trials`, times [`CALIBRATION_SLACK`].
pub fn calibrate_rounds(graph: &Graph, target: f64, trials: usize, seed: u64) -> usize {
    let samples = (0..trials.max(1))
        .map(|t| {
            flood_rounds(
                graph,
                &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64)),
            )
        })
        .collect();
    quantile_rounds(samples, target)
}

/// As [`calibrate_rounds`] but drawing a fresh `G(n, edge_prob)` per trial.
pub fn calibrate_rounds_gnp(
    n: usize,
    edge_prob: Option<f64>,
    target: f64,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    let samples = (0..trials.max(1) as u64)
        .map(|t| {
            let g = gen_gnp(n, edge_prob, derive_seed(seed, 2 * t))?;
            Ok(flood_rounds(
                &g,
                &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * t + 1)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(quantile_rounds(samples, target))
}
