//! Invertible Bloom lookup table over `(F_p)^b`.
//!
//! Each of the `m = k * subtable_size` cells holds a count, a key-sum vector,
//! a checksum-sum vector and an optional parity bitset of party ids. Every
//! field is a linear function of the inserted (key, coefficient) multiset, so
//! sketches can be added and scaled like vectors.
//!
//! Party-id bits track which parties inserted a key an odd number of times.
//! They stay meaningful under sums and negation but not under general
//! scaling: scaling a sketch whose ids are non-zero by anything other than
//! `0`, `1` or `-1` poisons them, and poison propagates through sums.

mod peel;
mod refine;
mod wire;

pub use peel::{PeelEntry, PeelResult};
pub use refine::{refine_halves, SketchHalf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FVector, FieldParams, Scalar};
use crate::hashing::HashConfig;

/// Threshold coefficients `c_k` for the 2-core of a random `k`-uniform hypergraph.
pub const THRESHOLDS: [(usize, f64); 5] =
    [(3, 1.222), (4, 1.295), (5, 1.425), (6, 1.570), (7, 1.721)];

pub fn threshold_coefficient(k: usize) -> Result<f64> {
    THRESHOLDS
        .iter()
        .find(|(kk, _)| *kk == k)
        .map(|&(_, c)| c)
        .ok_or(Error::UnsupportedK(k))
}

/// Number of cells for difference bound `t`: at least `(c_k + epsilon) * t`,
/// rounded up to a multiple of `k`. With `growable`, the subtable size is
/// further rounded up to a power of two so the table can later be doubled.
pub fn size_for(t: usize, k: usize, epsilon: f64, growable: bool) -> Result<usize> {
    let c = threshold_coefficient(k)?;
    if t == 0 {
        return Err(Error::InvalidSize("difference bound must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidSize(format!("epsilon {epsilon}")));
    }
    // The tolerance absorbs float noise such as 1.222 + 0.028 != 1.25.
    let raw = ((c + epsilon) * t as f64 - 1e-9).ceil() as usize;
    let mut sub = raw.div_ceil(k);
    if growable {
        sub = sub.next_power_of_two();
    }
    Ok(sub * k)
}

/// Everything parties must agree on to exchange sketches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SketchConfig {
    field: FieldParams,
    hash: HashConfig,
    ids_width: usize,
}

impl SketchConfig {
    pub fn new(field: FieldParams, hash: HashConfig, ids_width: usize) -> Result<Self> {
        if field.q() != hash.q() {
            return Err(Error::ConfigMismatch(format!(
                "field q = {} but hash q = {}",
                field.q(),
                hash.q()
            )));
        }
        if ids_width > u16::MAX as usize {
            return Err(Error::InvalidSize(format!("ids width {ids_width}")));
        }
        Ok(SketchConfig {
            field,
            hash,
            ids_width,
        })
    }

    /// Convenience constructor: `p`, `q`, `k`, total cells (rounded up to a
    /// multiple of `k`) and the two hash seeds.
    pub fn with_cells(
        p: u64,
        q: u64,
        k: usize,
        cells: usize,
        position_seed: u64,
        checksum_seed: u64,
    ) -> Result<Self> {
        let field = FieldParams::new(p, q)?;
        let hash = HashConfig::new(k, cells.div_ceil(k).max(1), position_seed, checksum_seed, q)?;
        SketchConfig::new(field, hash, 0)
    }

    pub fn with_ids_width(self, ids_width: usize) -> Result<Self> {
        SketchConfig::new(self.field, self.hash, ids_width)
    }

    pub fn with_hash(self, hash: HashConfig) -> Result<Self> {
        SketchConfig::new(self.field, hash, self.ids_width)
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn hash(&self) -> &HashConfig {
        &self.hash
    }

    pub fn ids_width(&self) -> usize {
        self.ids_width
    }

    pub fn cells(&self) -> usize {
        self.hash.cells()
    }

    pub(crate) fn stride(&self) -> usize {
        1 + self.field.key_digits() + self.field.hash_digits()
    }

    pub(crate) fn ids_words(&self) -> usize {
        self.ids_width.div_ceil(64)
    }

    /// Packed message size in bits:
    /// `m * (⌈log2 p⌉ * (1 + b_key + b_hash) + ids_width)`.
    pub fn packed_bits(&self) -> u64 {
        self.cells() as u64 * self.cell_bits()
    }

    pub(crate) fn cell_bits(&self) -> u64 {
        self.field.bits_per_digit() as u64 * self.stride() as u64 + self.ids_width as u64
    }
}

/// A parity bitset over party indices `0..width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartyBits {
    width: usize,
    words: Vec<u64>,
}

impl PartyBits {
    pub fn empty(width: usize) -> Self {
        PartyBits {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn from_parties(width: usize, parties: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = PartyBits::empty(width);
        for party in parties {
            if party >= width {
                return Err(Error::InvalidParty { party, width });
            }
            bits.words[party / 64] ^= 1 << (party % 64);
        }
        Ok(bits)
    }

    pub(crate) fn from_words(width: usize, words: &[u64]) -> Self {
        PartyBits {
            width,
            words: words.to_vec(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains(&self, party: usize) -> bool {
        party < self.width && self.words[party / 64] >> (party % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&i| self.contains(i))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Borrowed view of one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellRef<'a> {
    raw: &'a [u64],
    key_digits: usize,
    ids: &'a [u64],
    ids_width: usize,
}

impl CellRef<'_> {
    pub fn count(&self) -> Scalar {
        Scalar::from_reduced(self.raw[0])
    }

    pub fn key_sum(&self) -> FVector {
        FVector::from_raw(&self.raw[1..1 + self.key_digits])
    }

    pub fn hash_sum(&self) -> FVector {
        FVector::from_raw(&self.raw[1 + self.key_digits..])
    }

    pub fn ids(&self) -> PartyBits {
        PartyBits::from_words(self.ids_width, self.ids)
    }

    pub fn is_zero(&self) -> bool {
        self.raw.iter().all(|&d| d == 0) && self.ids.iter().all(|&w| w == 0)
    }
}

/// Positions and digit encodings of one key, computed once per insert.
#[derive(Debug, Clone)]
pub(crate) struct KeyImage {
    pub key: u64,
    pub positions: Vec<usize>,
    pub key_digits: Vec<u64>,
    pub hash_digits: Vec<u64>,
}

impl KeyImage {
    pub fn new(cfg: &SketchConfig) -> Self {
        KeyImage {
            key: 0,
            positions: vec![0; cfg.hash.k()],
            key_digits: vec![0; cfg.field.key_digits()],
            hash_digits: vec![0; cfg.field.hash_digits()],
        }
    }

    pub fn fill(&mut self, cfg: &SketchConfig, key: u64) {
        self.key = key;
        cfg.hash.positions_into(key, &mut self.positions);
        cfg.field.encode_into(key, &mut self.key_digits);
        cfg.field
            .encode_into(cfg.hash.checksum(key), &mut self.hash_digits);
    }
}

/// An invertible Bloom lookup table with field-valued cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    cfg: SketchConfig,
    data: Vec<u64>,
    ids: Vec<u64>,
    ids_poisoned: bool,
}

impl Sketch {
    /// The all-zero sketch.
    pub fn new(cfg: SketchConfig) -> Self {
        Sketch {
            data: vec![0; cfg.cells() * cfg.stride()],
            ids: vec![0; cfg.cells() * cfg.ids_words()],
            ids_poisoned: false,
            cfg,
        }
    }

    /// Sketch of a set with unit coefficients, optionally tagged with a party.
    pub fn from_keys<'a>(
        cfg: SketchConfig,
        keys: impl IntoIterator<Item = &'a u64>,
        party: Option<usize>,
    ) -> Result<Self> {
        let mut s = Sketch::new(cfg);
        let mut img = KeyImage::new(&cfg);
        for &key in keys {
            img.fill(&cfg, key);
            s.apply(&img, 1, party)?;
        }
        Ok(s)
    }

    pub fn config(&self) -> &SketchConfig {
        &self.cfg
    }

    pub fn cells(&self) -> usize {
        self.cfg.cells()
    }

    pub fn cell(&self, i: usize) -> CellRef<'_> {
        let stride = self.cfg.stride();
        let w = self.cfg.ids_words();
        CellRef {
            raw: &self.data[i * stride..(i + 1) * stride],
            key_digits: self.cfg.field.key_digits(),
            ids: &self.ids[i * w..(i + 1) * w],
            ids_width: self.cfg.ids_width,
        }
    }

    pub fn ids_poisoned(&self) -> bool {
        self.ids_poisoned
    }

    /// True when every field of every cell is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&d| d == 0) && self.ids.iter().all(|&w| w == 0)
    }

    pub fn packed_bits(&self) -> u64 {
        self.cfg.packed_bits()
    }

    /// Adds `coeff * key` to the sketch. Passing a party toggles that party's
    /// id bit in each of the key's cells, once per call whatever the
    /// coefficient. A zero coefficient is a no-op. Deletion is insertion with
    /// coefficient `p - 1`.
    pub fn insert(&mut self, key: u64, coeff: Scalar, party: Option<usize>) -> Result<()> {
        let mut img = KeyImage::new(&self.cfg);
        img.fill(&self.cfg, key);
        self.apply(&img, coeff.value() % self.cfg.field.p(), party)
    }

    pub(crate) fn apply(&mut self, img: &KeyImage, coeff: u64, party: Option<usize>) -> Result<()> {
        if let Some(party) = party {
            if party >= self.cfg.ids_width {
                return Err(Error::InvalidParty {
                    party,
                    width: self.cfg.ids_width,
                });
            }
        }
        if coeff == 0 {
            return Ok(());
        }
        self.apply_digits(img, coeff);
        if let Some(party) = party {
            if !self.ids_poisoned {
                let w = self.cfg.ids_words();
                for &pos in &img.positions {
                    self.ids[pos * w + party / 64] ^= 1 << (party % 64);
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_digits(&mut self, img: &KeyImage, coeff: u64) {
        let f = self.cfg.field;
        let stride = self.cfg.stride();
        let kd = img.key_digits.len();
        for &pos in &img.positions {
            let cell = &mut self.data[pos * stride..(pos + 1) * stride];
            cell[0] = f.add_raw(cell[0], coeff);
            for (slot, &d) in cell[1..1 + kd].iter_mut().zip(&img.key_digits) {
                *slot = f.add_raw(*slot, f.mul_raw(coeff, d));
            }
            for (slot, &d) in cell[1 + kd..].iter_mut().zip(&img.hash_digits) {
                *slot = f.add_raw(*slot, f.mul_raw(coeff, d));
            }
        }
    }

    pub(crate) fn toggle_ids(&mut self, img: &KeyImage, bits: &[u64]) {
        if self.ids_poisoned {
            return;
        }
        let w = self.cfg.ids_words();
        for &pos in &img.positions {
            for (slot, &b) in self.ids[pos * w..(pos + 1) * w].iter_mut().zip(bits) {
                *slot ^= b;
            }
        }
    }

    fn check_compatible(&self, other: &Sketch) -> Result<()> {
        if self.cfg != other.cfg {
            return Err(Error::ConfigMismatch(format!(
                "{:?} vs {:?}",
                self.cfg, other.cfg
            )));
        }
        Ok(())
    }

    fn is_sign(&self, c: u64) -> bool {
        c == 1 || c == self.cfg.field.p() - 1
    }

    fn poison(&mut self) {
        self.ids_poisoned = true;
        self.ids.iter_mut().for_each(|w| *w = 0);
    }

    /// `self += c * other`, componentwise over `F_p`; ids are XORed when the
    /// scaling keeps them meaningful and poisoned otherwise.
    pub fn add_scaled(&mut self, other: &Sketch, c: Scalar) -> Result<()> {
        self.check_compatible(other)?;
        let f = self.cfg.field;
        let c = c.value() % f.p();
        if c == 0 {
            return Ok(());
        }
        if c == 1 {
            for (a, &b) in self.data.iter_mut().zip(&other.data) {
                *a = f.add_raw(*a, b);
            }
        } else {
            for (a, &b) in self.data.iter_mut().zip(&other.data) {
                *a = f.add_raw(*a, f.mul_raw(c, b));
            }
        }
        if other.ids_poisoned || (!self.is_sign(c) && other.ids.iter().any(|&w| w != 0)) {
            self.poison();
        } else if !self.ids_poisoned {
            for (a, &b) in self.ids.iter_mut().zip(&other.ids) {
                *a ^= b;
            }
        }
        Ok(())
    }

    /// Componentwise sum; ids are XORed.
    pub fn combine(&self, other: &Sketch) -> Result<Sketch> {
        let mut out = self.clone();
        out.add_scaled(other, Scalar::ONE)?;
        Ok(out)
    }

    /// `self - other`.
    pub fn subtract(&self, other: &Sketch) -> Result<Sketch> {
        let mut out = self.clone();
        out.add_scaled(other, self.cfg.field.minus_one())?;
        Ok(out)
    }

    /// Multiplies every count and sum by `c`. `c = 0` yields the zero sketch.
    pub fn scale(&self, c: Scalar) -> Sketch {
        let f = self.cfg.field;
        let c = c.value() % f.p();
        if c == 0 {
            return Sketch::new(self.cfg);
        }
        let mut out = self.clone();
        if c != 1 {
            out.data.iter_mut().for_each(|d| *d = f.mul_raw(c, *d));
            if !self.is_sign(c) && out.ids.iter().any(|&w| w != 0) {
                out.poison();
            }
        }
        out
    }

    /// Copy with the ids field cleared (and unpoisoned).
    pub fn without_ids(&self) -> Sketch {
        let mut out = self.clone();
        out.ids.iter_mut().for_each(|w| *w = 0);
        out.ids_poisoned = false;
        out
    }

    pub(crate) fn raw_cell(&self, i: usize) -> &[u64] {
        let stride = self.cfg.stride();
        &self.data[i * stride..(i + 1) * stride]
    }

    pub(crate) fn raw_ids(&self, i: usize) -> &[u64] {
        let w = self.cfg.ids_words();
        &self.ids[i * w..(i + 1) * w]
    }
}
