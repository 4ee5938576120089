use std::collections::{BTreeMap, BTreeSet};

use mprecon::{refine_halves, Scalar, Sketch, SketchConfig};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

const PRIMES: [u64; 4] = [3, 101, 65537, 1_000_000_007];

fn config(p: u64, sub: usize, ids: usize, seed: u64) -> SketchConfig {
    SketchConfig::with_cells(p, 1 << 16, 4, 4 * sub, seed, seed ^ 0x55)
        .unwrap()
        .with_ids_width(ids)
        .unwrap()
}

fn weighted(cfg: SketchConfig, keys: &[(u64, u64)]) -> Sketch {
    let mut s = Sketch::new(cfg);
    for &(k, c) in keys {
        s.insert(k, cfg.field().scalar(c), None).unwrap();
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_insert_equals_scaled_sum(
        pi in 0..PRIMES.len(),
        a in btree_set(any::<u64>(), 0..40),
        b in btree_set(any::<u64>(), 0..40),
        ca: u64,
        cb: u64,
        seed: u64,
    ) {
        let cfg = config(PRIMES[pi], 16, 0, seed);
        let f = *cfg.field();
        let (ca, cb) = (f.scalar(ca), f.scalar(cb));
        let mut direct = Sketch::new(cfg);
        for &k in &a {
            direct.insert(k, ca, None).unwrap();
        }
        for &k in &b {
            direct.insert(k, cb, None).unwrap();
        }
        let sa = Sketch::from_keys(cfg, &a, None).unwrap();
        let sb = Sketch::from_keys(cfg, &b, None).unwrap();
        let via_scale = sa.scale(ca).combine(&sb.scale(cb)).unwrap();
        let mut via_add = sa.scale(ca);
        via_add.add_scaled(&sb, cb).unwrap();
        prop_assert_eq!(&direct, &via_scale);
        prop_assert_eq!(&direct, &via_add);
    }

    #[test]
    fn subtract_cancels_shared_keys(
        common in btree_set(any::<u64>(), 0..50),
        only in btree_set(any::<u64>(), 0..10),
        seed: u64,
    ) {
        let cfg = config(1_000_000_007, 8, 0, seed);
        let only: BTreeSet<u64> = only.difference(&common).copied().collect();
        let full: BTreeSet<u64> = common.union(&only).copied().collect();
        let diff = Sketch::from_keys(cfg, &full, None)
            .unwrap()
            .subtract(&Sketch::from_keys(cfg, &common, None).unwrap())
            .unwrap();
        prop_assert_eq!(diff, Sketch::from_keys(cfg, &only, None).unwrap());
    }

    #[test]
    fn unit_combinations_xor_ids(
        sets in vec(btree_set(0u64..200, 0..20), 1..6),
        seed: u64,
    ) {
        let n = sets.len();
        let cfg = config(101, 8, n, seed);
        let mut sum = Sketch::new(cfg);
        for (i, s) in sets.iter().enumerate() {
            sum = sum.combine(&Sketch::from_keys(cfg, s, Some(i)).unwrap()).unwrap();
        }
        // Rebuild from each key's holders: coefficient h, ids = XOR of holders.
        let mut holders: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, s) in sets.iter().enumerate() {
            for &k in s {
                holders.entry(k).or_default().push(i);
            }
        }
        let mut direct = Sketch::new(cfg);
        for (&k, hs) in &holders {
            for &i in hs {
                direct.insert(k, Scalar::ONE, Some(i)).unwrap();
            }
        }
        prop_assert_eq!(&sum, &direct);
        prop_assert!(!sum.ids_poisoned());
    }

    #[test]
    fn refine_matches_direct_construction(
        keys in btree_set(any::<u64>(), 0..60),
        log_sub in 0u32..6,
        ids in 0usize..3,
        seed: u64,
    ) {
        let cfg = config(65537, 1 << log_sub, ids, seed);
        let doubled = cfg.with_hash(cfg.hash().doubled().unwrap()).unwrap();
        let party = (ids > 0).then(|| ids - 1);
        let old = Sketch::from_keys(cfg, &keys, party).unwrap();
        let direct = Sketch::from_keys(doubled, &keys, party).unwrap();
        let refined = refine_halves(&old, &direct.odd_half().unwrap()).unwrap();
        prop_assert_eq!(refined, direct);
    }

    #[test]
    fn wire_round_trip(
        pi in 0..PRIMES.len(),
        keys in vec(any::<u64>(), 0..30),
        ids in 0usize..20,
        seed: u64,
    ) {
        let cfg = config(PRIMES[pi], 8, ids, seed);
        let mut s = Sketch::new(cfg);
        for (i, &k) in keys.iter().enumerate() {
            let party = (ids > 0).then_some(i % ids.max(1));
            s.insert(k, if i % 3 == 0 { cfg.field().minus_one() } else { Scalar::ONE }, party)
                .unwrap();
        }
        let back = Sketch::from_bytes(&s.to_bytes().unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn generous_table_lists_exact_multiset(
        keys in vec((any::<u64>(), 1u64..1_000_000_007), 0..25),
        seed: u64,
    ) {
        let cfg = config(1_000_000_007, 64, 0, seed);
        let mut expected: BTreeMap<u64, u64> = BTreeMap::new();
        for &(k, c) in &keys {
            let e = expected.entry(k).or_default();
            *e = (*e + c) % 1_000_000_007;
        }
        expected.retain(|_, c| *c != 0);
        let peeled = weighted(cfg, &keys).peel();
        let got: BTreeMap<u64, u64> = peeled
            .entries
            .iter()
            .map(|e| (e.key, e.multiplicity.value()))
            .collect();
        // 25 keys in 256 cells rarely leave a 2-core; only complete decodes
        // are compared.
        if peeled.complete {
            prop_assert_eq!(got, expected);
        }
    }
}
