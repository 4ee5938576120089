//! Simulated communication patterns: relay star, rooted tree, PUSH-PULL
//! gossip and the pairwise baseline, with message and round accounting and
//! per-party recovery evaluation.

mod gossip;
mod graph;
mod relay;

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gossip::{run_gossip, GossipMode};
pub use graph::{
    calibrate_rounds, calibrate_rounds_gnp, default_edge_prob, flood_rounds, gen_gnp, random_tree,
    random_tree_with_parties, CALIBRATION_SLACK,
};
pub use relay::{run_pairwise_baseline, run_relay, run_tree, RelayMode};

/// Undirected simple graph on vertices `0..n` with parties placed on
/// distinct vertices. Vertices without a party relay but hold no set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    parties: Vec<usize>,
}

impl Graph {
    /// A connected graph with party `i` on vertex `i`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let adj = adjacency(n, edges)?;
        let g = Graph {
            adj,
            parties: (0..n).collect(),
        };
        if !g.is_connected() {
            return Err(Error::MalformedTopology("graph is disconnected".into()));
        }
        Ok(g)
    }

    pub fn with_parties(mut self, parties: Vec<usize>) -> Result<Graph> {
        check_placement(self.adj.len(), &parties)?;
        self.parties = parties;
        Ok(self)
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph::from_edges(n, &edges).expect("complete graph is connected")
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges).expect("path is connected")
    }

    pub fn vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Vertex of each party.
    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        edge_list(&self.adj)
    }

    pub(crate) fn from_adj_unchecked(adj: Vec<Vec<usize>>) -> Graph {
        let parties = (0..adj.len()).collect();
        Graph { adj, parties }
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.adj)
    }

    /// Parses the adjacency text format: a header line `n <count>` followed by
    /// one `u v` edge per line. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Graph> {
        let (n, edges) = parse_edges(text)?;
        Graph::from_edges(n, &edges)
    }

    pub fn to_text(&self) -> String {
        edges_to_text(&self.adj)
    }
}

/// Rooted tree whose leaves carry the parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
    root: usize,
    parties: Vec<usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl Tree {
    /// Validates that the edges form a tree, that `root` is a vertex and that
    /// each party sits on a distinct non-root leaf.
    pub fn new(
        n: usize,
        edges: &[(usize, usize)],
        root: usize,
        parties: Vec<usize>,
    ) -> Result<Tree> {
        let adj = adjacency(n, edges).map_err(|e| Error::MalformedTree(e.to_string()))?;
        if root >= n {
            return Err(Error::MalformedTree(format!("root {root} out of range")));
        }
        if edges.len() + 1 != n || !connected(&adj) {
            return Err(Error::MalformedTree(
                "edges do not form a spanning tree".into(),
            ));
        }
        check_placement(n, &parties).map_err(|e| Error::MalformedTree(e.to_string()))?;
        if parties.is_empty() {
            return Err(Error::MalformedTree("no parties".into()));
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for &v in &parties {
            if v == root || adj[v].len() != 1 {
                return Err(Error::MalformedTree(format!(
                    "party vertex {v} is not a leaf"
                )));
            }
        }
        Ok(Tree {
            adj,
            root,
            parties,
            parent,
            depth,
        })
    }

    /// Star with the root at vertex 0 and party `i` on leaf `i + 1`.
    pub fn star(n: usize) -> Tree {
        let edges: Vec<(usize, usize)> = (1..=n).map(|v| (0, v)).collect();
        Tree::new(n + 1, &edges, 0, (1..=n).collect()).expect("star is a tree")
    }

    pub fn vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v]
            .iter()
            .copied()
            .filter(move |&c| self.parent[c] == Some(v))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() - 1
    }

    /// Length of the longest leaf-to-root path.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        edges_to_text(&self.adj)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    RelayWired,
    RelayWireless,
    RootedTree(Tree),
    Graph(Graph),
}

/// What a party ended up with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartyOutcome {
    AllRecovered,
    MissingOne,
    MissingMany,
    /// A party without a set; it takes part in the exchange but does not decode.
    Null,
}

/// Why a party failed to recover everything, in order of precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureCause {
    /// Some source's contribution never reached the party.
    InsufficientSpread,
    /// A source reached the party but its accumulated coefficient is 0 mod p.
    ZeroedCoefficient,
    /// A key outside the common intersection has total coefficient 0 mod p.
    NonemptyX,
    PeelFailure,
    /// Decoding completed but listed a wrong key.
    ChecksumFalsePositive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyReport {
    pub outcome: PartyOutcome,
    /// Keys of the true union the party lacks plus keys it wrongly holds.
    pub missing: usize,
    pub cause: Option<FailureCause>,
    /// False when a recovered key's holder bits failed the parity check.
    pub holders_reliable: bool,
}

impl PartyReport {
    pub(crate) fn null() -> Self {
        PartyReport {
            outcome: PartyOutcome::Null,
            missing: 0,
            cause: None,
            holders_reliable: true,
        }
    }

    /// Compares a party's final set against the true union. `cause` is only
    /// consulted when the party did not recover everything.
    pub(crate) fn evaluate(
        truth: &BTreeSet<u64>,
        got: &BTreeSet<u64>,
        complete: bool,
        cause: impl FnOnce() -> Option<FailureCause>,
    ) -> Self {
        let missing = truth.difference(got).count() + got.difference(truth).count();
        let outcome = match missing {
            0 => PartyOutcome::AllRecovered,
            1 => PartyOutcome::MissingOne,
            _ => PartyOutcome::MissingMany,
        };
        let cause = (missing > 0).then(|| {
            cause().unwrap_or(if complete {
                FailureCause::ChecksumFalsePositive
            } else {
                FailureCause::PeelFailure
            })
        });
        PartyReport {
            outcome,
            missing,
            cause,
            holders_reliable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimStats {
    /// Sketch transmissions.
    pub messages: u64,
    /// Total packed size of all transmissions.
    pub bits: u64,
    pub rounds: u64,
    /// One report per party, in party order.
    pub parties: Vec<PartyReport>,
}

impl SimStats {
    pub fn count(&self, outcome: PartyOutcome) -> usize {
        self.parties.iter().filter(|r| r.outcome == outcome).count()
    }
}

pub(crate) fn union_of(sets: &[BTreeSet<u64>]) -> BTreeSet<u64> {
    sets.iter().flatten().copied().collect()
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); n];
    let mut seen = BTreeSet::new();
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::MalformedTopology(format!(
                "edge ({u}, {v}) out of range for {n} vertices"
            )));
        }
        if u == v {
            return Err(Error::MalformedTopology(format!("self loop at {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::MalformedTopology(format!(
                "duplicate edge ({u}, {v})"
            )));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(adj)
}

fn check_placement(n: usize, parties: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in parties {
        if v >= n {
            return Err(Error::MalformedTopology(format!(
                "party vertex {v} out of range"
            )));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::MalformedTopology(format!(
                "two parties on vertex {v}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adj.len()
}

fn edge_list(adj: &[Vec<usize>]) -> Vec<(usize, usize)> {
    adj.iter()
        .enumerate()
        .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect()
}

fn edges_to_text(adj: &[Vec<usize>]) -> String {
    let mut out = format!("n {}\n", adj.len());
    for (u, v) in edge_list(adj) {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

fn parse_edges(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let bad = |line: usize, msg: &str| Error::MalformedTopology(format!("line {line}: {msg}"));
    let mut n = None;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (a, b) = (parts.next().unwrap(), parts.next());
        if parts.next().is_some() {
            return Err(bad(i + 1, "expected two fields"));
        }
        let b = b.ok_or_else(|| bad(i + 1, "expected two fields"))?;
        match n {
            None => {
                if a != "n" {
                    return Err(bad(i + 1, "missing `n <count>` header"));
                }
                n = Some(
                    b.parse::<usize>()
                        .map_err(|_| bad(i + 1, "bad vertex count"))?,
                );
            }
            Some(_) => {
                let u = a.parse::<usize>().map_err(|_| bad(i + 1, "bad vertex"))?;
                let v = b.parse::<usize>().map_err(|_| bad(i + 1, "bad vertex"))?;
                edges.push((u, v));
            }
        }
    }
    let n = n.ok_or_else(|| Error::MalformedTopology("empty topology file".into()))?;
    Ok((n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_round_trip() {
        let g = Graph::parse("n 4\n0 1\n1 2\n# comment\n2 3\n0 3\n").unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn text_format_errors() {
        assert!(Graph::parse("0 1\n").is_err());
        assert!(Graph::parse("n 3\n0 1\n").is_err()); // disconnected
        assert!(Graph::parse("n 3\n0 1\n1 1\n").is_err());
        assert!(Graph::parse("n 3\n0 1\n1 0\n1 2\n").is_err());
        assert!(Graph::parse("n 3\n0 5\n").is_err());
        assert!(Graph::parse("n 3\n0 1 2\n").is_err());
        assert!(Graph::parse("").is_err());
    }

    #[test]
    fn party_placement() {
        let g = Graph::path(4);
        assert!(g.clone().with_parties(vec![0, 3]).is_ok());
        assert!(g.clone().with_parties(vec![0, 0]).is_err());
        assert!(g.with_parties(vec![4]).is_err());
    }

    #[test]
    fn tree_validation() {
        // 0 - 1 - {2, 3}
        let edges = [(0, 1), (1, 2), (1, 3)];
        let t = Tree::new(4, &edges, 0, vec![2, 3]).unwrap();
        assert_eq!(t.height(), 2);
        assert_eq!(t.edge_count(), 3);
        assert_eq!(t.children(1).collect::<Vec<_>>(), vec![2, 3]);
        assert!(matches!(
            Tree::new(4, &edges, 0, vec![1]),
            Err(Error::MalformedTree(_))
        ));
        assert!(matches!(
            Tree::new(4, &[(0, 1), (1, 2), (2, 0)], 0, vec![]),
            Err(Error::MalformedTree(_))
        ));
        assert!(matches!(
            Tree::new(4, &[(0, 1), (2, 3)], 0, vec![3]),
            Err(Error::MalformedTree(_))
        ));
        assert!(matches!(
            Tree::new(4, &edges, 9, vec![2]),
            Err(Error::MalformedTree(_))
        ));
        // a leaf root cannot carry a party
        assert!(matches!(
            Tree::new(2, &[(0, 1)], 0, vec![0]),
            Err(Error::MalformedTree(_))
        ));
    }

    #[test]
    fn evaluate_counts_both_directions() {
        let truth: BTreeSet<u64> = [1, 2, 3].into();
        let r = PartyReport::evaluate(&truth, &truth, true, || None);
        assert_eq!((r.outcome, r.cause), (PartyOutcome::AllRecovered, None));
        let r = PartyReport::evaluate(&truth, &[1, 2].into(), false, || None);
        assert_eq!(
            (r.outcome, r.cause),
            (PartyOutcome::MissingOne, Some(FailureCause::PeelFailure))
        );
        let r = PartyReport::evaluate(&truth, &[1, 2, 3, 4].into(), true, || None);
        assert_eq!(r.cause, Some(FailureCause::ChecksumFalsePositive));
        let r = PartyReport::evaluate(&truth, &[1].into(), true, || Some(FailureCause::NonemptyX));
        assert_eq!(
            (r.outcome, r.cause),
            (PartyOutcome::MissingMany, Some(FailureCause::NonemptyX))
        );
    }
}
