//! Prime-field arithmetic over `F_p` for a runtime 64-bit prime, and the
//! injective base-`p` encoding of 64-bit keys and checksums into vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of `F_p`, always stored reduced into `[0, p)`.
///
/// A `Scalar` does not carry its modulus; arithmetic goes through the
/// [`FieldParams`] that produced it.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct Scalar(u64);

impl Scalar {
    pub const ZERO: Scalar = Scalar(0);
    pub const ONE: Scalar = Scalar(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub(crate) fn from_reduced(v: u64) -> Scalar {
        Scalar(v)
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// A fixed-length vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FVector(Vec<Scalar>);

impl FVector {
    pub fn zero(width: usize) -> Self {
        FVector(vec![Scalar::ZERO; width])
    }

    pub fn digits(&self) -> &[Scalar] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|d| d.is_zero())
    }

    pub(crate) fn from_raw(raw: &[u64]) -> Self {
        FVector(raw.iter().map(|&d| Scalar(d)).collect())
    }

    pub(crate) fn raw(&self) -> impl DoubleEndedIterator<Item = u64> + '_ {
        self.0.iter().map(|d| d.0)
    }
}

/// Field and encoding parameters shared by every party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    p: u64,
    q: u64,
    key_digits: usize,
    hash_digits: usize,
}

impl FieldParams {
    /// Validates `p` (prime) and `q` (power of two, at least 2) and derives the
    /// minimal digit counts with `p^key_digits >= 2^64` and `p^hash_digits >= q`.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::CompositeP(p));
        }
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::InvalidChecksumRange(q));
        }
        Ok(FieldParams {
            p,
            q,
            key_digits: digits_needed(p, 1u128 << 64),
            hash_digits: digits_needed(p, q as u128),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn key_digits(&self) -> usize {
        self.key_digits
    }

    pub fn hash_digits(&self) -> usize {
        self.hash_digits
    }

    /// `⌈log2 p⌉`, the packed width of one field element.
    pub fn bits_per_digit(&self) -> u32 {
        64 - (self.p - 1).leading_zeros()
    }

    /// Reduces an arbitrary integer into the field.
    pub fn scalar(&self, v: u64) -> Scalar {
        Scalar(v % self.p)
    }

    /// The field element `-1`, i.e. `p - 1`.
    pub fn minus_one(&self) -> Scalar {
        Scalar(self.p - 1)
    }

    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(self.add_raw(a.0, b.0))
    }

    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(self.sub_raw(a.0, b.0))
    }

    pub fn neg(&self, a: Scalar) -> Scalar {
        Scalar(self.neg_raw(a.0))
    }

    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(self.mul_raw(a.0, b.0))
    }

    pub fn pow(&self, base: Scalar, mut exp: u64) -> Scalar {
        let mut acc = 1 % self.p;
        let mut b = base.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, b);
            }
            b = self.mul_raw(b, b);
            exp >>= 1;
        }
        Scalar(acc)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn mul_inv(&self, a: Scalar) -> Result<Scalar> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i128, a.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Scalar(t0.rem_euclid(self.p as i128) as u64))
    }

    /// Little-endian base-`p` expansion of `x` into exactly `width` digits.
    pub fn encode_value(&self, x: u64, width: usize) -> Result<FVector> {
        let mut out = vec![0u64; width];
        if !self.encode_into(x, &mut out) {
            return Err(Error::Overflow {
                value: x,
                width,
                p: self.p,
            });
        }
        Ok(FVector::from_raw(&out))
    }

    /// Inverse of [`encode_value`](Self::encode_value); fails with
    /// `OutOfDomain` when the represented integer exceeds `max`.
    pub fn decode_value(&self, v: &FVector, max: u64) -> Result<u64> {
        self.decode_raw(v.raw(), max).ok_or(Error::OutOfDomain)
    }

    /// Encodes a 64-bit key into `key_digits` digits.
    pub fn encode_key(&self, key: u64) -> FVector {
        let mut out = vec![0u64; self.key_digits];
        self.encode_into(key, &mut out);
        FVector::from_raw(&out)
    }

    /// Decodes a key vector, rejecting values outside the 64-bit key domain.
    pub fn decode_key(&self, v: &FVector) -> Result<u64> {
        if v.len() != self.key_digits {
            return Err(Error::WidthMismatch {
                expected: self.key_digits,
                got: v.len(),
            });
        }
        self.decode_value(v, u64::MAX)
    }

    // Raw-digit helpers used by the sketch hot loops.

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        let (s, overflow) = a.overflowing_add(b);
        if overflow || s >= self.p {
            s.wrapping_sub(self.p)
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(self.p)
        }
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        if self.p <= u32::MAX as u64 {
            (a * b) % self.p
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    /// Writes the digits of `x` into `out`; returns false if `x` does not fit.
    pub(crate) fn encode_into(&self, mut x: u64, out: &mut [u64]) -> bool {
        for d in out.iter_mut() {
            *d = x % self.p;
            x /= self.p;
        }
        x == 0
    }

    pub(crate) fn decode_raw(
        &self,
        digits: impl DoubleEndedIterator<Item = u64>,
        max: u64,
    ) -> Option<u64> {
        let mut acc: u128 = 0;
        for d in digits.rev() {
            acc = acc.checked_mul(self.p as u128)?.checked_add(d as u128)?;
            if acc > max as u128 {
                return None;
            }
        }
        Some(acc as u64)
    }
}

fn digits_needed(p: u64, bound: u128) -> usize {
    let mut reach: u128 = 1;
    let mut width = 0;
    while reach < bound {
        reach = reach.saturating_mul(p as u128);
        width += 1;
    }
    width.max(1)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve primes are a complete witness
/// set for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
