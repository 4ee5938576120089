use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{union_of, FailureCause, Graph, PartyReport, SimStats};
use crate::error::{Error, Result};
use crate::field::{FieldParams, Scalar};
use crate::protocol::{outcome_from_peel, Combo};
use crate::sketch::{Sketch, SketchConfig};

/// How gossip state is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GossipMode {
    /// Every node holds and transmits real sketches. Debug builds check each
    /// node's sketch against its coefficient vector after every round.
    Full,
    /// Only per-source coefficients are propagated; the final sketches are
    /// built from them by linearity. Produces the same results as `Full`.
    CoefficientsOnly,
}

struct Transfer {
    dst: usize,
    src: usize,
    kappa: u64,
}

/// Per-vertex coefficient vectors over the sources, plus which sources have
/// reached each vertex at all.
struct Ledger {
    n: usize,
    coeffs: Vec<u64>,
    sums: Vec<Scalar>,
    reached: Vec<bool>,
}

impl Ledger {
    fn new(n: usize, active: &[bool]) -> Self {
        let mut coeffs = vec![0; n * n];
        let mut sums = vec![Scalar::ZERO; n];
        let mut reached = vec![false; n * n];
        for v in 0..n {
            reached[v * n + v] = true;
            if active[v] {
                coeffs[v * n + v] = 1;
                sums[v] = Scalar::ONE;
            }
        }
        Ledger {
            n,
            coeffs,
            sums,
            reached,
        }
    }

    fn apply(&mut self, f: &FieldParams, transfers: &[Transfer]) {
        let n = self.n;
        let old = self.coeffs.clone();
        let old_sums = self.sums.clone();
        let old_reached = self.reached.clone();
        for t in transfers {
            let (dst, src) = (t.dst * n, t.src * n);
            for s in 0..n {
                self.coeffs[dst + s] =
                    f.add_raw(self.coeffs[dst + s], f.mul_raw(t.kappa, old[src + s]));
                self.reached[dst + s] |= old_reached[src + s];
            }
            self.sums[t.dst] = f.add(
                self.sums[t.dst],
                f.mul(Scalar::from_reduced(t.kappa), old_sums[t.src]),
            );
        }
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.coeffs[v * self.n..(v + 1) * self.n]
    }
}

/// `Σ_s coeffs[s] v_s`, assembled key by key.
fn materialize(
    cfg: SketchConfig,
    sets: &[Option<&BTreeSet<u64>>],
    coeffs: &[u64],
) -> Result<Sketch> {
    let f = cfg.field();
    let mut per_key: BTreeMap<u64, u64> = BTreeMap::new();
    for (set, &c) in sets.iter().zip(coeffs) {
        if let (Some(set), true) = (set, c != 0) {
            for &x in *set {
                let e = per_key.entry(x).or_insert(0);
                *e = f.add_raw(*e, c);
            }
        }
    }
    let mut s = Sketch::new(cfg);
    for (x, c) in per_key {
        s.insert(x, Scalar::from_reduced(c), None)?;
    }
    Ok(s)
}

/// Synchronous PUSH-PULL gossip of sketch combinations on `graph`.
///
/// Each round every vertex picks a uniform neighbor, pushes its current
/// combination scaled by a fresh nonzero multiplier and pulls the
/// neighbor's, scaled likewise. All messages of a round are computed from
/// the state at the start of the round. After `rounds` rounds a party adds
/// `(p - α)` copies of its own sketch, `α` being its coefficient sum, and
/// peels. Parties with empty sets take part but do not decode.
pub fn run_gossip(
    graph: &Graph,
    sets: &[BTreeSet<u64>],
    rounds: usize,
    cfg: SketchConfig,
    seed: u64,
    mode: GossipMode,
) -> Result<SimStats> {
    if sets.len() != graph.parties().len() {
        return Err(Error::MalformedTopology(format!(
            "{} sets for {} placed parties",
            sets.len(),
            graph.parties().len()
        )));
    }
    let f = *cfg.field();
    let p = f.p();
    let n = graph.vertices();
    let mut at: Vec<Option<&BTreeSet<u64>>> = vec![None; n];
    for (set, &v) in sets.iter().zip(graph.parties()) {
        at[v] = (!set.is_empty()).then_some(set);
    }
    let active: Vec<bool> = at.iter().map(Option::is_some).collect();

    let mut ledger = Ledger::new(n, &active);
    let mut combos: Vec<Combo> = match mode {
        GossipMode::Full => at
            .iter()
            .map(|s| match s {
                Some(s) => Sketch::from_keys(cfg, *s, None).map(Combo::unit),
                None => Ok(Combo::zero(cfg)),
            })
            .collect::<Result<_>>()?,
        GossipMode::CoefficientsOnly => Vec::new(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let msg_bits = cfg.packed_bits() + f.bits_per_digit() as u64;
    let mut messages = 0u64;
    let mut transfers = Vec::with_capacity(2 * n);
    for _ in 0..rounds {
        transfers.clear();
        for j in 0..n {
            let nb = graph.neighbors(j);
            let u = nb[rng.gen_range(0..nb.len())];
            transfers.push(Transfer {
                dst: u,
                src: j,
                kappa: rng.gen_range(1..p),
            });
            transfers.push(Transfer {
                dst: j,
                src: u,
                kappa: rng.gen_range(1..p),
            });
        }
        messages += transfers.len() as u64;
        ledger.apply(&f, &transfers);
        if mode == GossipMode::Full {
            let old = combos.clone();
            for t in &transfers {
                combos[t.dst].add_scaled(&old[t.src], Scalar::from_reduced(t.kappa))?;
            }
            if cfg!(debug_assertions) {
                for (v, c) in combos.iter().enumerate() {
                    debug_assert_eq!(c.coeff_sum, ledger.sums[v]);
                    debug_assert_eq!(c.sketch, materialize(cfg, &at, ledger.row(v))?);
                }
            }
        }
    }

    let truth = union_of(sets);
    let common: BTreeSet<u64> = {
        let mut it = at.iter().flatten();
        let first = it.next().map(|s| (*s).clone()).unwrap_or_default();
        it.fold(first, |acc, s| acc.intersection(s).copied().collect())
    };
    let mut parties = Vec::with_capacity(sets.len());
    for &v in graph.parties() {
        let Some(own_set) = at[v] else {
            parties.push(PartyReport::null());
            continue;
        };
        let alpha = ledger.sums[v];
        let correction = f.neg(alpha);
        let mut corrected_coeffs = ledger.row(v).to_vec();
        corrected_coeffs[v] = f.add_raw(corrected_coeffs[v], correction.value());
        let corrected = match mode {
            GossipMode::Full => {
                let mut s = combos[v].sketch.clone();
                s.add_scaled(&Sketch::from_keys(cfg, own_set, None)?, correction)?;
                debug_assert_eq!(s, materialize(cfg, &at, &corrected_coeffs)?);
                s
            }
            GossipMode::CoefficientsOnly => materialize(cfg, &at, &corrected_coeffs)?,
        };
        let out = outcome_from_peel(own_set, &f, corrected.peel(), None);
        let row = ledger.row(v);
        let reached = &ledger.reached[v * n..(v + 1) * n];
        let cause = || {
            let sources = (0..n).filter(|&s| active[s] && s != v);
            if sources.clone().any(|s| !reached[s]) {
                return Some(FailureCause::InsufficientSpread);
            }
            if sources.clone().any(|s| row[s] == 0) {
                return Some(FailureCause::ZeroedCoefficient);
            }
            let vanishes = |x: &u64| {
                let total = (0..n)
                    .filter(|&s| at[s].is_some_and(|set| set.contains(x)))
                    .fold(0, |acc, s| f.add_raw(acc, corrected_coeffs[s]));
                total == 0
            };
            if truth.difference(&common).any(vanishes) {
                return Some(FailureCause::NonemptyX);
            }
            None
        };
        parties.push(PartyReport::evaluate(
            &truth,
            &out.union_of_local,
            out.complete,
            cause,
        ));
    }
    Ok(SimStats {
        messages,
        bits: messages * msg_bits,
        rounds: rounds as u64,
        parties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{gen_gnp, PartyOutcome};

    fn cfg(p: u64, cells: usize) -> SketchConfig {
        SketchConfig::with_cells(p, 1 << 32, 4, cells, 77, 78).unwrap()
    }

    fn singletons(n: usize) -> Vec<BTreeSet<u64>> {
        (0..n as u64).map(|i| [i * 1_000_003 + 17].into()).collect()
    }

    #[test]
    fn zero_rounds_recovers_nothing() {
        let g = Graph::complete(4);
        let s = run_gossip(
            &g,
            &singletons(4),
            0,
            cfg(1_000_000_007, 16),
            1,
            GossipMode::Full,
        )
        .unwrap();
        assert_eq!(s.messages, 0);
        for r in &s.parties {
            assert_eq!(r.outcome, PartyOutcome::MissingMany);
            assert_eq!(r.missing, 3);
            assert_eq!(r.cause, Some(FailureCause::InsufficientSpread));
        }
    }

    #[test]
    fn complete_triangle_converges() {
        let g = Graph::complete(3);
        let mut failures = 0;
        for seed in 0..1000 {
            let s = run_gossip(
                &g,
                &singletons(3),
                10,
                cfg(1_000_000_007, 48),
                seed,
                GossipMode::CoefficientsOnly,
            )
            .unwrap();
            assert_eq!(s.messages, 60);
            failures += (s.count(PartyOutcome::AllRecovered) != 3) as usize;
        }
        assert!(failures <= 1, "{failures} failing trials");
    }

    #[test]
    fn tight_tables_only_fail_by_peeling() {
        // Six cells for three keys: pairs of keys that share every cell are
        // common, but spreading itself never fails at this field size.
        let g = Graph::complete(3);
        for seed in 0..300 {
            let s = run_gossip(
                &g,
                &singletons(3),
                10,
                cfg(1_000_000_007, 6),
                seed,
                GossipMode::CoefficientsOnly,
            )
            .unwrap();
            for r in &s.parties {
                assert!(
                    matches!(r.cause, None | Some(FailureCause::PeelFailure)),
                    "{:?}",
                    r.cause
                );
            }
        }
    }

    #[test]
    fn full_and_coefficient_modes_agree() {
        for seed in 0..6 {
            let g = gen_gnp(12, None, seed).unwrap();
            let sets: Vec<BTreeSet<u64>> = (0..12u64).map(|i| [i, i + 1, 100].into()).collect();
            for p in [101, 1_000_000_007] {
                let c = cfg(p, 48);
                let a = run_gossip(&g, &sets, 7, c, seed, GossipMode::Full).unwrap();
                let b = run_gossip(&g, &sets, 7, c, seed, GossipMode::CoefficientsOnly).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn small_field_failures_are_attributed() {
        let g = Graph::complete(6);
        let sets = singletons(6);
        let mut seen = BTreeSet::new();
        for seed in 0..300 {
            let s =
                run_gossip(&g, &sets, 6, cfg(5, 24), seed, GossipMode::CoefficientsOnly).unwrap();
            for r in &s.parties {
                assert_eq!(r.outcome == PartyOutcome::AllRecovered, r.cause.is_none());
                seen.extend(r.cause);
            }
        }
        assert!(seen.contains(&FailureCause::ZeroedCoefficient));
    }

    #[test]
    fn null_parties_relay_but_do_not_decode() {
        let g = Graph::path(5).with_parties(vec![0, 2, 4]).unwrap();
        let sets: Vec<BTreeSet<u64>> = vec![[1].into(), BTreeSet::new(), [3].into()];
        let s = run_gossip(&g, &sets, 40, cfg(1_000_000_007, 16), 9, GossipMode::Full).unwrap();
        assert_eq!(s.parties[1].outcome, PartyOutcome::Null);
        assert_eq!(s.parties[0].outcome, PartyOutcome::AllRecovered);
        assert_eq!(s.parties[2].outcome, PartyOutcome::AllRecovered);
        assert_eq!(s.messages, 40 * 10);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = gen_gnp(20, None, 3).unwrap();
        let run = |seed| {
            run_gossip(
                &g,
                &singletons(20),
                12,
                cfg(101, 40),
                seed,
                GossipMode::CoefficientsOnly,
            )
            .unwrap()
        };
        assert_eq!(run(4), run(4));
    }
}
