use super::{Sketch, SketchConfig};
use crate::error::{Error, Result};

/// The odd-indexed cells of a sketch whose subtables were doubled.
///
/// Together with the sketch at the previous size this determines the doubled
/// sketch, so growing a table only costs the new half of its cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchHalf {
    cfg: SketchConfig,
    data: Vec<u64>,
    ids: Vec<u64>,
    ids_poisoned: bool,
}

impl SketchHalf {
    /// Configuration of the full (doubled) sketch.
    pub fn config(&self) -> &SketchConfig {
        &self.cfg
    }

    pub fn cells(&self) -> usize {
        self.cfg.cells() / 2
    }

    pub fn packed_bits(&self) -> u64 {
        self.cells() as u64 * self.cfg.cell_bits()
    }
}

impl Sketch {
    /// Extracts the odd-indexed cells. Subtable sizes must be even.
    pub fn odd_half(&self) -> Result<SketchHalf> {
        if !self.cfg.hash.subtable_size().is_multiple_of(2) {
            return Err(Error::ConfigMismatch(
                "odd subtable size has no odd half".into(),
            ));
        }
        let stride = self.cfg.stride();
        let w = self.cfg.ids_words();
        let mut data = Vec::with_capacity(self.data.len() / 2);
        let mut ids = Vec::with_capacity(self.ids.len() / 2);
        for cell in (1..self.cells()).step_by(2) {
            data.extend_from_slice(&self.data[cell * stride..(cell + 1) * stride]);
            ids.extend_from_slice(&self.ids[cell * w..(cell + 1) * w]);
        }
        Ok(SketchHalf {
            cfg: self.cfg,
            data,
            ids,
            ids_poisoned: self.ids_poisoned,
        })
    }
}

/// Rebuilds the doubled sketch from the old sketch and the doubled sketch's
/// odd cells: within each subtable, even cell `2i` is old cell `i` minus odd
/// cell `2i + 1`.
pub fn refine_halves(old: &Sketch, half: &SketchHalf) -> Result<Sketch> {
    let s = old.cfg.hash.subtable_size();
    if !s.is_power_of_two() {
        return Err(Error::ConfigMismatch(format!(
            "subtable size {s} is not a power of two"
        )));
    }
    let expected = old.cfg.with_hash(old.cfg.hash.doubled()?)?;
    if half.cfg != expected {
        return Err(Error::ConfigMismatch(
            "half does not belong to the doubled table".into(),
        ));
    }
    let f = old.cfg.field;
    let stride = old.cfg.stride();
    let w = old.cfg.ids_words();
    let mut out = Sketch::new(expected);
    for old_cell in 0..old.cells() {
        // old cell i*s + j splits into doubled cells i*2s + 2j and i*2s + 2j + 1,
        // i.e. 2*old_cell and 2*old_cell + 1; the half stores the latter at old_cell.
        let even = 2 * old_cell;
        let odd = even + 1;
        let src = &old.data[old_cell * stride..(old_cell + 1) * stride];
        let odd_src = &half.data[old_cell * stride..(old_cell + 1) * stride];
        for d in 0..stride {
            out.data[odd * stride + d] = odd_src[d];
            out.data[even * stride + d] = f.sub_raw(src[d], odd_src[d]);
        }
        for d in 0..w {
            out.ids[odd * w + d] = half.ids[old_cell * w + d];
            out.ids[even * w + d] = old.ids[old_cell * w + d] ^ half.ids[old_cell * w + d];
        }
    }
    if old.ids_poisoned || half.ids_poisoned {
        out.poison();
    }
    Ok(out)
}
