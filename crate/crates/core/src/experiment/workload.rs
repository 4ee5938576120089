//! Random party sets.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};

fn key_mask(key_bits: u32) -> u64 {
    if key_bits >= 64 {
        u64::MAX
    } else {
        (1u64 << key_bits) - 1
    }
}

/// `count` distinct keys drawn uniformly from `[0, 2^key_bits)`.
pub fn distinct_keys(count: usize, key_bits: u32, rng: &mut impl Rng) -> Result<Vec<u64>> {
    if key_bits == 0 || (key_bits < 64 && count as u128 > 1u128 << key_bits) {
        return Err(Error::Config(format!(
            "cannot draw {count} distinct {key_bits}-bit keys"
        )));
    }
    let mask = key_mask(key_bits);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen::<u64>() & mask;
        if seen.insert(k) {
            out.push(k);
        }
    }
    Ok(out)
}

/// One distinct key per party.
pub fn distinct_singletons(
    n: usize,
    key_bits: u32,
    rng: &mut impl Rng,
) -> Result<Vec<BTreeSet<u64>>> {
    Ok(distinct_keys(n, key_bits, rng)?
        .into_iter()
        .map(|k| BTreeSet::from([k]))
        .collect())
}

/// Two sets of `set_size` keys (the first may be one larger when `diff` is
/// odd) whose symmetric difference has exactly `diff` keys.
pub fn two_party(
    set_size: usize,
    diff: usize,
    key_bits: u32,
    rng: &mut impl Rng,
) -> Result<[BTreeSet<u64>; 2]> {
    let only_a = diff.div_ceil(2);
    let only_b = diff / 2;
    if only_a > set_size {
        return Err(Error::Config(format!(
            "difference {diff} exceeds twice the set size {set_size}"
        )));
    }
    let common = set_size - only_a;
    let keys = distinct_keys(common + only_a + only_b, key_bits, rng)?;
    let (c, rest) = keys.split_at(common);
    let (a, b) = rest.split_at(only_a);
    Ok([
        c.iter().chain(a).copied().collect(),
        c.iter().chain(b).copied().collect(),
    ])
}

/// `n` sets whose generalized difference (union minus intersection) has
/// exactly `diff` keys. Each such key goes to a uniform nonempty proper
/// subset of the parties; the common part is sized so the mean set size is
/// as close to `set_size` as possible.
pub fn n_party(
    n: usize,
    set_size: usize,
    diff: usize,
    key_bits: u32,
    rng: &mut impl Rng,
) -> Result<Vec<BTreeSet<u64>>> {
    if n < 2 && diff > 0 {
        return Err(Error::Config("a single party has no difference".into()));
    }
    if n > 63 {
        return Err(Error::Config(format!(
            "n-party workload supports at most 63 parties, got {n}"
        )));
    }
    let full = (1u64 << n) - 1;
    let masks: Vec<u64> = (0..diff)
        .map(|_| loop {
            let m = rng.gen::<u64>() & full;
            if m != 0 && m != full {
                break m;
            }
        })
        .collect();
    let held: usize = masks.iter().map(|m| m.count_ones() as usize).sum();
    let common = set_size.saturating_sub((held as f64 / n.max(1) as f64).round() as usize);
    let keys = distinct_keys(common + diff, key_bits, rng)?;
    let (c, d) = keys.split_at(common);
    let mut sets: Vec<BTreeSet<u64>> = vec![c.iter().copied().collect(); n];
    for (&k, &m) in d.iter().zip(&masks) {
        for (i, set) in sets.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                set.insert(k);
            }
        }
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_party_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let [a, b] = two_party(1000, 101, 64, &mut rng).unwrap();
        assert_eq!(a.len(), 1000);
        assert_eq!(b.len(), 999);
        assert_eq!(a.symmetric_difference(&b).count(), 101);
        assert!(two_party(3, 10, 64, &mut rng).is_err());
    }

    #[test]
    fn n_party_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2, 3, 5, 8] {
            let sets = n_party(n, 1000, 100, 64, &mut rng).unwrap();
            let union: BTreeSet<u64> = sets.iter().flatten().copied().collect();
            let inter = sets.iter().skip(1).fold(sets[0].clone(), |acc, s| &acc & s);
            assert_eq!(union.len() - inter.len(), 100);
            let mean = sets.iter().map(BTreeSet::len).sum::<usize>() as f64 / n as f64;
            assert!((mean - 1000.0).abs() <= 1.0, "mean size {mean}");
        }
    }

    #[test]
    fn key_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let keys = distinct_keys(16, 4, &mut rng).unwrap();
        assert_eq!(keys.iter().collect::<BTreeSet<_>>().len(), 16);
        assert!(keys.iter().all(|&k| k < 16));
        assert!(distinct_keys(17, 4, &mut rng).is_err());
    }
}
