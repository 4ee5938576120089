//! Little-endian binary encoding.
//!
//! ```text
//! "MPRS" | version u8 | p u64 | q u64 | k u8 | subtable_size u32 |
//! b_key u8 | b_hash u8 | ids_width u16 | position_seed u64 | checksum_seed u64 |
//! m cells of: count u64 | b_key x u64 | b_hash x u64 | ids ⌈ids_width/8⌉ bytes
//! ```

use super::{Sketch, SketchConfig};
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::hashing::HashConfig;

pub const MAGIC: &[u8; 4] = b"MPRS";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 8 + 1 + 4 + 1 + 1 + 2 + 8 + 8;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Wire("truncated input".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Sketch {
    /// Serializes the sketch. A sketch with poisoned ids cannot be encoded,
    /// since the format has no way to mark them unusable.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let c = &self.cfg;
        if self.ids_poisoned && c.ids_width > 0 {
            return Err(Error::IdsPoisoned);
        }
        let id_bytes = c.ids_width.div_ceil(8);
        let mut out = Vec::with_capacity(HEADER_LEN + self.cells() * (8 * c.stride() + id_bytes));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&c.field.p().to_le_bytes());
        out.extend_from_slice(&c.field.q().to_le_bytes());
        out.push(c.hash.k() as u8);
        out.extend_from_slice(&(c.hash.subtable_size() as u32).to_le_bytes());
        out.push(c.field.key_digits() as u8);
        out.push(c.field.hash_digits() as u8);
        out.extend_from_slice(&(c.ids_width as u16).to_le_bytes());
        out.extend_from_slice(&c.hash.position_seed().to_le_bytes());
        out.extend_from_slice(&c.hash.checksum_seed().to_le_bytes());
        for cell in 0..self.cells() {
            for d in self.raw_cell(cell) {
                out.extend_from_slice(&d.to_le_bytes());
            }
            let words = self.raw_ids(cell);
            for b in 0..id_bytes {
                out.push((words[b / 8] >> (8 * (b % 8))) as u8);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Sketch> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Wire("bad magic".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Wire(format!("unsupported version {version}")));
        }
        let p = r.u64()?;
        let q = r.u64()?;
        let k = r.u8()? as usize;
        let subtable = r.u32()? as usize;
        let b_key = r.u8()? as usize;
        let b_hash = r.u8()? as usize;
        let ids_width = r.u16()? as usize;
        let position_seed = r.u64()?;
        let checksum_seed = r.u64()?;

        let field = FieldParams::new(p, q)?;
        if field.key_digits() != b_key || field.hash_digits() != b_hash {
            return Err(Error::Wire(format!(
                "digit counts ({b_key}, {b_hash}) disagree with p = {p}, q = {q}"
            )));
        }
        let hash = HashConfig::new(k, subtable, position_seed, checksum_seed, q)?;
        let cfg = SketchConfig::new(field, hash, ids_width)?;

        let mut s = Sketch::new(cfg);
        let stride = cfg.stride();
        let words = cfg.ids_words();
        let id_bytes = ids_width.div_ceil(8);
        for cell in 0..cfg.cells() {
            for d in 0..stride {
                let v = r.u64()?;
                if v >= p {
                    return Err(Error::Wire(format!("digit {v} not reduced mod {p}")));
                }
                s.data[cell * stride + d] = v;
            }
            for b in 0..id_bytes {
                s.ids[cell * words + b / 8] |= (r.u8()? as u64) << (8 * (b % 8));
            }
            if !ids_width.is_multiple_of(64) {
                let top = s.ids[cell * words + words - 1];
                if top >> (ids_width % 64) != 0 {
                    return Err(Error::Wire("ids bits set beyond width".into()));
                }
            }
        }
        if r.pos != buf.len() {
            return Err(Error::Wire(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        Ok(s)
    }
}
