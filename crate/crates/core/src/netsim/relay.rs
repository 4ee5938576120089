use std::collections::BTreeSet;

use super::{union_of, PartyReport, SimStats, Tree};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::protocol::{
    combine_general, difference_two, outcome_from_peel, reconcile_from_sum, Combo, ReconOutcome,
};
use crate::sketch::{size_for, Sketch, SketchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelayMode {
    /// The relay returns `Z - v_i` to each party separately.
    Wired,
    /// The relay broadcasts `Z` once.
    Wireless,
}

fn check_parties(n: usize, cfg: &SketchConfig) -> Result<()> {
    let p = cfg.field().p();
    if n as u128 > p as u128 {
        return Err(Error::TooManyParties { n, p });
    }
    Ok(())
}

/// Party `i`'s uploaded sketch, labeled with its id bit when the
/// configuration carries ids.
fn party_sketches(sets: &[BTreeSet<u64>], cfg: SketchConfig) -> Result<Vec<Sketch>> {
    sets.iter()
        .enumerate()
        .map(|(i, s)| Sketch::from_keys(cfg, s, (cfg.ids_width() > 0).then_some(i)))
        .collect()
}

fn report(truth: &BTreeSet<u64>, outcome: &ReconOutcome) -> PartyReport {
    let mut r = PartyReport::evaluate(truth, &outcome.union_of_local, outcome.complete, || None);
    r.holders_reliable = outcome.recovered.iter().all(|k| k.holders_reliable);
    r
}

fn sum(sketches: &[Sketch], cfg: SketchConfig) -> Result<Sketch> {
    let mut z = Sketch::new(cfg);
    for v in sketches {
        z.add_scaled(v, Scalar::ONE)?;
    }
    Ok(z)
}

/// Star network through a relay. Every party uploads its sketch; the relay
/// answers each party with `Z - v_i` (wired) or broadcasts `Z` (wireless).
pub fn run_relay(sets: &[BTreeSet<u64>], mode: RelayMode, cfg: SketchConfig) -> Result<SimStats> {
    let n = sets.len();
    check_parties(n, &cfg)?;
    let f = *cfg.field();
    let truth = union_of(sets);
    let uploads = party_sketches(sets, cfg)?;
    let z = sum(&uploads, cfg)?;
    let mut messages = n as u64;
    let parties = match mode {
        RelayMode::Wired => {
            messages += n as u64;
            let others_weight = f.scalar(n as u64 - 1);
            sets.iter()
                .zip(&uploads)
                .enumerate()
                .map(|(i, (own_set, upload))| {
                    let others = z.subtract(upload)?;
                    let own = Sketch::from_keys(cfg, own_set, None)?;
                    let corrected =
                        combine_general(&Combo::new(others, others_weight), &Combo::unit(own))?;
                    // Id bits in `others` cover every holder except `i`.
                    let offset = |key: u64| {
                        if own_set.contains(&key) {
                            others_weight
                        } else {
                            Scalar::ZERO
                        }
                    };
                    let mut out = outcome_from_peel(own_set, &f, corrected.peel(), Some(&offset));
                    for k in &mut out.recovered {
                        if let (Some(h), true) = (&mut k.holders, own_set.contains(&k.key)) {
                            h.insert(i);
                        }
                    }
                    Ok(report(&truth, &out))
                })
                .collect::<Result<Vec<_>>>()?
        }
        RelayMode::Wireless => {
            messages += 1;
            sets.iter()
                .map(|own_set| Ok(report(&truth, &reconcile_from_sum(own_set, &z, n)?)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(SimStats {
        messages,
        bits: messages * cfg.packed_bits(),
        rounds: 2,
        parties,
    })
}

/// Aggregation up a rooted tree followed by a broadcast of the total back
/// down. A vertex forwards its subtree sum once all of its children have
/// reported, so each phase takes as many steps as the tree is tall.
pub fn run_tree(tree: &Tree, sets: &[BTreeSet<u64>], cfg: SketchConfig) -> Result<SimStats> {
    let n = sets.len();
    if n != tree.parties().len() {
        return Err(Error::MalformedTree(format!(
            "{} sets for {} party leaves",
            n,
            tree.parties().len()
        )));
    }
    check_parties(n, &cfg)?;
    let truth = union_of(sets);
    let v = tree.vertices();
    let mut acc: Vec<Sketch> = vec![Sketch::new(cfg); v];
    for (i, (s, &leaf)) in party_sketches(sets, cfg)?
        .into_iter()
        .zip(tree.parties())
        .enumerate()
    {
        debug_assert_eq!(tree.parties()[i], leaf);
        acc[leaf] = s;
    }

    let mut waiting: Vec<usize> = (0..v).map(|u| tree.children(u).count()).collect();
    let mut sent = vec![false; v];
    sent[tree.root()] = true;
    let mut messages = 0u64;
    let mut rounds = 0u64;
    while waiting[tree.root()] > 0 {
        let ready: Vec<usize> = (0..v).filter(|&u| !sent[u] && waiting[u] == 0).collect();
        for &u in &ready {
            let parent = tree.parent(u).expect("non-root vertex has a parent");
            let msg = std::mem::replace(&mut acc[u], Sketch::new(cfg));
            acc[parent].add_scaled(&msg, Scalar::ONE)?;
            sent[u] = true;
            messages += 1;
        }
        for &u in &ready {
            waiting[tree.parent(u).unwrap()] -= 1;
        }
        rounds += 1;
    }
    let z = acc.swap_remove(tree.root());

    let mut frontier = vec![tree.root()];
    while !frontier.is_empty() {
        let next: Vec<usize> = frontier.iter().flat_map(|&u| tree.children(u)).collect();
        if next.is_empty() {
            break;
        }
        messages += next.len() as u64;
        rounds += 1;
        frontier = next;
    }

    let parties = sets
        .iter()
        .map(|own_set| Ok(report(&truth, &reconcile_from_sum(own_set, &z, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimStats {
        messages,
        bits: messages * cfg.packed_bits(),
        rounds,
        parties,
    })
}

/// Every ordered pair exchanges a two-party sketch sized for exactly that
/// pair's difference. `base` supplies the field, `k` and the hash seeds; its
/// table size is ignored.
pub fn run_pairwise_baseline(
    sets: &[BTreeSet<u64>],
    base: SketchConfig,
    epsilon: f64,
) -> Result<SimStats> {
    let n = sets.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "pairwise baseline needs at least two parties, got {n}"
        )));
    }
    let f = base.field();
    let h = base.hash();
    let truth = union_of(sets);
    let mut messages = 0u64;
    let mut bits = 0u64;
    let mut parties = Vec::with_capacity(n);
    for (i, own_set) in sets.iter().enumerate() {
        let mut union = own_set.clone();
        let mut complete = true;
        for (j, peer_set) in sets.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = own_set.symmetric_difference(peer_set).count();
            let cells = size_for(d.max(1), h.k(), epsilon, false)?;
            let cfg = SketchConfig::with_cells(
                f.p(),
                f.q(),
                h.k(),
                cells,
                h.position_seed(),
                h.checksum_seed(),
            )?;
            let peer = Sketch::from_keys(cfg, peer_set, None)?;
            messages += 1;
            bits += peer.packed_bits();
            let out = difference_two(own_set, &peer)?;
            complete &= out.complete;
            union.extend(out.union_of_local);
        }
        parties.push(PartyReport::evaluate(&truth, &union, complete, || None));
    }
    Ok(SimStats {
        messages,
        bits,
        rounds: 1,
        parties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::PartyOutcome;

    fn cfg(cells: usize, ids: usize) -> SketchConfig {
        SketchConfig::with_cells(1_000_000_007, 1 << 32, 4, cells, 21, 22)
            .unwrap()
            .with_ids_width(ids)
            .unwrap()
    }

    fn singletons(n: usize) -> Vec<BTreeSet<u64>> {
        (0..n as u64).map(|i| [1000 + i].into()).collect()
    }

    #[test]
    fn relay_counts() {
        let s = run_relay(&singletons(3), RelayMode::Wired, cfg(40, 0)).unwrap();
        assert_eq!(s.messages, 6);
        assert_eq!(s.bits, 6 * cfg(40, 0).packed_bits());
        let s = run_relay(&singletons(5), RelayMode::Wireless, cfg(40, 0)).unwrap();
        assert_eq!(s.messages, 6);
    }

    #[test]
    fn relay_singletons_recover_everything() {
        for mode in [RelayMode::Wired, RelayMode::Wireless] {
            for ids in [0, 3] {
                let s = run_relay(&singletons(3), mode, cfg(40, ids)).unwrap();
                assert_eq!(s.count(PartyOutcome::AllRecovered), 3, "{mode:?} ids={ids}");
                assert!(s.parties.iter().all(|r| r.holders_reliable));
            }
        }
    }

    #[test]
    fn relay_rejects_more_parties_than_p() {
        let c = SketchConfig::with_cells(3, 1 << 16, 3, 30, 1, 2).unwrap();
        assert!(matches!(
            run_relay(&singletons(4), RelayMode::Wireless, c),
            Err(Error::TooManyParties { n: 4, p: 3 })
        ));
    }

    #[test]
    fn star_tree_counts() {
        let s = run_tree(&Tree::star(5), &singletons(5), cfg(40, 5)).unwrap();
        assert_eq!((s.rounds, s.messages), (2, 10));
        assert_eq!(s.count(PartyOutcome::AllRecovered), 5);
    }

    #[test]
    fn full_binary_tree_counts() {
        let edges: Vec<(usize, usize)> = (1..15).map(|v| ((v - 1) / 2, v)).collect();
        let tree = Tree::new(15, &edges, 0, (7..15).collect()).unwrap();
        let s = run_tree(&tree, &singletons(8), cfg(64, 0)).unwrap();
        assert_eq!((s.messages, s.rounds), (28, 6));
        assert_eq!(s.count(PartyOutcome::AllRecovered), 8);
    }

    #[test]
    fn single_leaf_learns_nothing() {
        let set: BTreeSet<u64> = [5, 6].into();
        let s = run_tree(&Tree::star(1), &[set], cfg(16, 0)).unwrap();
        assert_eq!((s.messages, s.rounds), (2, 2));
        assert_eq!(s.parties[0].outcome, PartyOutcome::AllRecovered);
        assert!(run_tree(&Tree::star(2), &singletons(3), cfg(16, 0)).is_err());
    }

    #[test]
    fn pairwise_counts_and_floor() {
        let s = run_pairwise_baseline(&singletons(4), cfg(8, 0), 8.0).unwrap();
        assert_eq!(s.messages, 12);
        assert_eq!(s.count(PartyOutcome::AllRecovered), 4);

        let same: Vec<BTreeSet<u64>> = vec![[1, 2, 3].into(); 3];
        let s = run_pairwise_baseline(&same, cfg(8, 0), 0.5).unwrap();
        let floor = SketchConfig::with_cells(
            1_000_000_007,
            1 << 32,
            4,
            size_for(1, 4, 0.5, false).unwrap(),
            21,
            22,
        )
        .unwrap()
        .packed_bits();
        assert_eq!(s.bits, 6 * floor);
        assert!(run_pairwise_baseline(&same[..1], cfg(8, 0), 0.5).is_err());
    }
}
