use std::collections::VecDeque;

use super::{KeyImage, PartyBits, Sketch};
use crate::field::Scalar;

/// One key listed by the peeling decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelEntry {
    pub key: u64,
    /// Total coefficient of the key, as its least positive residue.
    pub multiplicity: Scalar,
    /// Party-id bits of the cell the key was peeled from, when ids are
    /// enabled and not poisoned.
    pub ids: Option<PartyBits>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelResult {
    pub entries: Vec<PeelEntry>,
    /// True iff the residual sums were all zero once every entry was removed.
    /// Id bits are not checked: keys that cancel in the sums still leave
    /// their holders' bits behind.
    pub complete: bool,
}

impl PeelResult {
    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.key)
    }
}

#[derive(Clone, Copy)]
enum Mode<'a> {
    Count,
    Candidates(&'a [u64]),
}

impl Sketch {
    /// Lists the sketch contents using the count field: a cell with count
    /// `a != 0` is pure for key `x` iff `a^{-1} * key_sum` decodes to `x`,
    /// the cell is one of `x`'s positions, and `hash_sum = a * H(x)`.
    pub fn peel(&self) -> PeelResult {
        self.peel_with(Mode::Count)
    }

    /// Peeling without the count field: each non-zero cell is tried against
    /// every candidate multiplicity in order, accepting the first that
    /// verifies. Candidates `{1, 2}` give the three-party decoder over `F_3`.
    pub fn peel_no_count(&self, candidates: &[Scalar]) -> PeelResult {
        let p = self.cfg.field.p();
        let cands: Vec<u64> = candidates
            .iter()
            .map(|c| c.value() % p)
            .filter(|&c| c != 0)
            .collect();
        self.peel_with(Mode::Candidates(&cands))
    }

    /// Runs the count-based purity test on one cell of this sketch, returning
    /// the verified key and its multiplicity.
    pub fn decode_cell(&self, cell: usize) -> Option<(u64, Scalar)> {
        let a = self.raw_cell(cell)[0];
        if a == 0 {
            return None;
        }
        self.verify(cell, a)
            .map(|key| (key, Scalar::from_reduced(a)))
    }

    fn verify(&self, cell: usize, a: u64) -> Option<u64> {
        let f = &self.cfg.field;
        let raw = self.raw_cell(cell);
        let kd = f.key_digits();
        let inv = f.mul_inv(Scalar::from_reduced(a)).ok()?.value();
        let key = f.decode_raw(raw[1..1 + kd].iter().map(|&y| f.mul_raw(y, inv)), u64::MAX)?;
        if !self.cfg.hash.hits(key, cell) {
            return None;
        }
        let mut h = self.cfg.hash.checksum(key);
        for &z in &raw[1 + kd..] {
            if f.mul_raw(a, h % f.p()) != z {
                return None;
            }
            h /= f.p();
        }
        Some(key)
    }

    fn cell_active(&self, cell: usize, mode: Mode<'_>) -> bool {
        let raw = self.raw_cell(cell);
        match mode {
            Mode::Count => raw[0] != 0,
            Mode::Candidates(_) => raw[1..].iter().any(|&d| d != 0),
        }
    }

    fn peel_with(&self, mode: Mode<'_>) -> PeelResult {
        let mut work = self.clone();
        let m = work.cells();
        let ids_on = work.cfg.ids_width > 0 && !work.ids_poisoned;
        let mut queue: VecDeque<usize> = (0..m).filter(|&c| work.cell_active(c, mode)).collect();
        let mut entries = Vec::new();
        let mut img = KeyImage::new(&work.cfg);
        // A decodable table lists at most m keys; the cap only guards
        // against checksum false positives cycling forever.
        let max_entries = 2 * m + 16;

        while let Some(cell) = queue.pop_front() {
            if entries.len() >= max_entries {
                break;
            }
            if !work.cell_active(cell, mode) {
                continue;
            }
            let found = match mode {
                Mode::Count => {
                    let a = work.raw_cell(cell)[0];
                    work.verify(cell, a).map(|k| (k, a))
                }
                Mode::Candidates(cands) => cands
                    .iter()
                    .find_map(|&a| work.verify(cell, a).map(|k| (k, a))),
            };
            let Some((key, a)) = found else { continue };
            let ids = ids_on.then(|| PartyBits::from_words(work.cfg.ids_width, work.raw_ids(cell)));
            img.fill(&work.cfg, key);
            work.apply_digits(&img, work.cfg.field.neg_raw(a));
            if let Some(bits) = &ids {
                work.toggle_ids(&img, bits.words());
            }
            entries.push(PeelEntry {
                key,
                multiplicity: Scalar::from_reduced(a),
                ids,
            });
            queue.extend(img.positions.iter().copied().filter(|&c| c != cell));
        }

        let complete = match mode {
            Mode::Count => work.data.iter().all(|&d| d == 0),
            Mode::Candidates(_) => (0..m).all(|c| !work.cell_active(c, mode)),
        };
        PeelResult { entries, complete }
    }
}

#[cfg(test)]
mod tests {
    use super::super::SketchConfig;
    use super::*;
    use crate::field::FieldParams;
    use crate::hashing::HashConfig;

    fn cfg(p: u64, cells: usize) -> SketchConfig {
        SketchConfig::with_cells(p, 1 << 32, 4, cells, 1, 2).unwrap()
    }

    #[test]
    fn empty_sketch_peels_complete() {
        let r = Sketch::new(cfg(7, 16)).peel();
        assert!(r.entries.is_empty());
        assert!(r.complete);
    }

    #[test]
    fn recovers_small_set_with_multiplicities() {
        let c = cfg(1_000_000_007, 64);
        let f = *c.field();
        let mut s = Sketch::new(c);
        s.insert(10, Scalar::ONE, None).unwrap();
        s.insert(20, f.scalar(5), None).unwrap();
        s.insert(30, f.minus_one(), None).unwrap();
        let r = s.peel();
        assert!(r.complete);
        let mut got: Vec<(u64, u64)> = r
            .entries
            .iter()
            .map(|e| (e.key, e.multiplicity.value()))
            .collect();
        got.sort();
        assert_eq!(got, vec![(10, 1), (20, 5), (30, 1_000_000_006)]);
    }

    #[test]
    fn doubled_key_over_f3() {
        let c = cfg(3, 32);
        let v = Sketch::from_keys(c, &[99], None).unwrap();
        let sum = v.combine(&v).unwrap();
        let r = sum.peel();
        assert!(r.complete);
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].key, 99);
        assert_eq!(r.entries[0].multiplicity, Scalar::from_reduced(2));
    }

    #[test]
    fn count_one_cell_with_three_keys_is_not_pure() {
        // One subtable cell shared by all keys: subtable size 1.
        let field = FieldParams::new(1_000_000_007, 1 << 32).unwrap();
        let hash = HashConfig::new(3, 1, 5, 6, 1 << 32).unwrap();
        let c = SketchConfig::new(field, hash, 0).unwrap();
        let mut s = Sketch::new(c);
        s.insert(111, Scalar::ONE, None).unwrap();
        s.insert(222, Scalar::ONE, None).unwrap();
        s.insert(333, field.minus_one(), None).unwrap();
        assert_eq!(s.cell(0).count(), Scalar::ONE);
        assert_eq!(s.decode_cell(0), None);
        let r = s.peel();
        assert!(!r.complete);
        assert!(r.entries.is_empty());
    }

    #[test]
    fn countless_three_party_decoder() {
        let c = cfg(3, 64);
        let f = *c.field();
        let a = Sketch::from_keys(c, &[1, 2, 3], None).unwrap();
        let b = Sketch::from_keys(c, &[2, 3, 4], None).unwrap();
        let d = Sketch::from_keys(c, &[3, 4, 5], None).unwrap();
        let z = a.combine(&b).unwrap().combine(&d).unwrap();
        let both = [Scalar::ONE, f.scalar(2)];
        let r = z.peel_no_count(&both);
        assert!(r.complete);
        let mut got: Vec<(u64, u64)> = r
            .entries
            .iter()
            .map(|e| (e.key, e.multiplicity.value()))
            .collect();
        got.sort();
        // key 3 is in all three sets and cancels.
        assert_eq!(got, vec![(1, 1), (2, 2), (4, 2), (5, 1)]);

        let only_one = z.peel_no_count(&[Scalar::ONE]);
        assert!(!only_one.complete);
        assert!(only_one.keys().all(|k| k == 1 || k == 5));
    }

    #[test]
    fn ids_report_holders_and_clear() {
        let c = cfg(5, 64).with_ids_width(3).unwrap();
        let s0 = Sketch::from_keys(c, &[7, 8], Some(0)).unwrap();
        let s1 = Sketch::from_keys(c, &[7], Some(1)).unwrap();
        let s2 = Sketch::from_keys(c, &[9], Some(2)).unwrap();
        let z = s0.combine(&s1).unwrap().combine(&s2).unwrap();
        let r = z.peel();
        assert!(r.complete);
        for e in &r.entries {
            let holders: Vec<usize> = e.ids.as_ref().unwrap().iter().collect();
            match e.key {
                7 => assert_eq!(holders, vec![0, 1]),
                8 => assert_eq!(holders, vec![0]),
                9 => assert_eq!(holders, vec![2]),
                k => panic!("unexpected key {k}"),
            }
        }
    }

    #[test]
    fn peel_is_deterministic() {
        let c = cfg(1_000_000_007, 40);
        let keys: Vec<u64> = (0..25).map(|i| i * 7919 + 3).collect();
        let s = Sketch::from_keys(c, &keys, None).unwrap();
        assert_eq!(s.peel(), s.peel());
    }
}
