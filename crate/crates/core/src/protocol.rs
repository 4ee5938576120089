//! Reconciliation built on sketches: two-party differences, the general
//! two-combination decoder, local correction for n-party sums, and holder
//! identification from party-id bits.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::field::{FieldParams, Scalar};
use crate::sketch::{PartyBits, PeelResult, Sketch};

/// A linear combination of party sketches together with the mod-p sum of
/// its coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combo {
    pub sketch: Sketch,
    pub coeff_sum: Scalar,
}

impl Combo {
    pub fn new(sketch: Sketch, coeff_sum: Scalar) -> Self {
        Combo { sketch, coeff_sum }
    }

    /// A single party's sketch, coefficient 1.
    pub fn unit(sketch: Sketch) -> Self {
        Combo {
            sketch,
            coeff_sum: Scalar::ONE,
        }
    }

    pub fn zero(cfg: crate::sketch::SketchConfig) -> Self {
        Combo {
            sketch: Sketch::new(cfg),
            coeff_sum: Scalar::ZERO,
        }
    }

    pub fn scale(&self, c: Scalar) -> Combo {
        let f = self.sketch.config().field();
        Combo {
            sketch: self.sketch.scale(c),
            coeff_sum: f.mul(self.coeff_sum, c),
        }
    }

    /// `self += c * other`, keeping the coefficient sum in step.
    pub fn add_scaled(&mut self, other: &Combo, c: Scalar) -> Result<()> {
        self.sketch.add_scaled(&other.sketch, c)?;
        let f = *self.sketch.config().field();
        self.coeff_sum = f.add(self.coeff_sum, f.mul(other.coeff_sum, c));
        Ok(())
    }
}

/// One key learned from a reconciliation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredKey {
    pub key: u64,
    pub multiplicity: Scalar,
    /// Parties holding the key, when the ids field was usable.
    pub holders: Option<BTreeSet<usize>>,
    /// False when the ids parity disagreed with the multiplicity.
    pub holders_reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconOutcome {
    pub recovered: Vec<RecoveredKey>,
    pub complete: bool,
    /// The caller's set extended with every key it learned.
    pub union_of_local: BTreeSet<u64>,
}

/// Two-party reconciliation from one side: subtracts the caller's sketch from
/// the peer's and lists the difference. Multiplicity 1 marks keys only the
/// peer holds and `p - 1` keys only the caller holds; over `F_2` the two
/// coincide and membership in `own_set` decides.
pub fn difference_two(own_set: &BTreeSet<u64>, peer_sketch: &Sketch) -> Result<ReconOutcome> {
    let cfg = *peer_sketch.config();
    let own = Sketch::from_keys(cfg, own_set, None)?;
    let diff = peer_sketch.subtract(&own)?;
    let peeled = diff.peel();
    let p = cfg.field().p();
    let mut union_of_local = own_set.clone();
    let recovered = peeled
        .entries
        .iter()
        .map(|e| {
            let peer_only = if p == 2 {
                !own_set.contains(&e.key)
            } else {
                e.multiplicity == Scalar::ONE
            };
            if peer_only {
                union_of_local.insert(e.key);
            }
            RecoveredKey {
                key: e.key,
                multiplicity: e.multiplicity,
                holders: None,
                holders_reliable: true,
            }
        })
        .collect();
    Ok(ReconOutcome {
        recovered,
        complete: peeled.complete,
        union_of_local,
    })
}

/// Combines two linear combinations so that keys held by every party cancel:
/// returns `L1 + γ L2` with `γ = -α β^{-1}`. When `α = 0`, `L1` already has
/// that property and is returned unchanged.
pub fn combine_general(l1: &Combo, l2: &Combo) -> Result<Sketch> {
    let f = *l1.sketch.config().field();
    if l1.coeff_sum.is_zero() {
        return Ok(l1.sketch.clone());
    }
    if l2.coeff_sum.is_zero() {
        return Err(Error::ZeroBeta);
    }
    let gamma = f.neg(f.mul(l1.coeff_sum, f.mul_inv(l2.coeff_sum)?));
    let mut out = l1.sketch.clone();
    out.add_scaled(&l2.sketch, gamma)?;
    Ok(out)
}

/// `Z + (p - n) * own`: the caller acts as `p - n + 1` copies of itself so
/// that keys held by all `n` participants cancel. Dropout handling is the
/// same computation with `n` counting only the participants.
pub fn local_correct(z: &Sketch, n_participants: usize, own_sketch: &Sketch) -> Result<Sketch> {
    let f = *z.config().field();
    if n_participants as u128 > f.p() as u128 {
        return Err(Error::TooManyParties {
            n: n_participants,
            p: f.p(),
        });
    }
    let correction = f.neg(f.scalar(n_participants as u64));
    let mut out = z.clone();
    out.add_scaled(own_sketch, correction)?;
    Ok(out)
}

/// Keys whose coefficient in `L1 + γ L2` vanishes mod `p` although they are
/// not held by every party, evaluated directly from memberships.
///
/// `memberships` maps each key to the parties holding it. `γ` is taken as 0
/// when `Σ α_i = 0` (and also when `Σ β_i = 0`, where no γ exists).
pub fn oracle_excluded_set(
    memberships: &BTreeMap<u64, BTreeSet<usize>>,
    alphas: &[Scalar],
    betas: &[Scalar],
    p: u64,
) -> BTreeSet<u64> {
    assert_eq!(
        alphas.len(),
        betas.len(),
        "one alpha and one beta per party"
    );
    let n = alphas.len();
    let modp = |v: u128| (v % p as u128) as u64;
    let alpha: u128 = alphas.iter().map(|a| a.value() as u128).sum();
    let beta: u128 = betas.iter().map(|b| b.value() as u128).sum();
    let (alpha, beta) = (modp(alpha), modp(beta));
    let gamma = if alpha == 0 || beta == 0 {
        0
    } else {
        // Fermat inverse, kept independent of the field module.
        let mut inv = 1u128;
        let (mut b, mut e) = (beta as u128, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                inv = inv * b % p as u128;
            }
            b = b * b % p as u128;
            e >>= 1;
        }
        modp((p - alpha) as u128 * inv)
    };
    memberships
        .iter()
        .filter(|(_, holders)| !holders.is_empty() && holders.len() < n)
        .filter(|(_, holders)| {
            let total: u128 = holders
                .iter()
                .map(|&i| alphas[i].value() as u128 + gamma as u128 * betas[i].value() as u128)
                .sum();
            modp(total) == 0
        })
        .map(|(&k, _)| k)
        .collect()
}

/// Parties whose id bit is set. The number of holders must have the same
/// parity as `holder_count`, the multiplicity the key had in the unit-
/// coefficient sum the ids came from.
pub fn holders_from_ids(ids: &PartyBits, holder_count: Scalar) -> Result<BTreeSet<usize>> {
    let bits = ids.count_ones();
    if bits % 2 != (holder_count.value() % 2) as usize {
        return Err(Error::ParityMismatch {
            bits,
            multiplicity: holder_count.value(),
        });
    }
    Ok(ids.iter().collect())
}

/// Peels a corrected n-party sketch and extends `own_set` with everything
/// listed.
///
/// `holder_offset(key)` converts a listed multiplicity into the number of
/// parties whose id bits are present for that key; pass `None` when ids are
/// not tracked.
pub fn decode_corrected(
    own_set: &BTreeSet<u64>,
    corrected: &Sketch,
    holder_offset: Option<&dyn Fn(u64) -> Scalar>,
) -> ReconOutcome {
    let peeled = corrected.peel();
    outcome_from_peel(own_set, corrected.config().field(), peeled, holder_offset)
}

pub(crate) fn outcome_from_peel(
    own_set: &BTreeSet<u64>,
    f: &FieldParams,
    peeled: PeelResult,
    holder_offset: Option<&dyn Fn(u64) -> Scalar>,
) -> ReconOutcome {
    let mut union_of_local = own_set.clone();
    let recovered = peeled
        .entries
        .into_iter()
        .map(|e| {
            union_of_local.insert(e.key);
            let (holders, holders_reliable) = match (&e.ids, holder_offset) {
                (Some(ids), Some(offset)) => {
                    let count = f.add(e.multiplicity, offset(e.key));
                    match holders_from_ids(ids, count) {
                        Ok(h) => (Some(h), true),
                        Err(_) => (Some(ids.iter().collect()), false),
                    }
                }
                _ => (None, true),
            };
            RecoveredKey {
                key: e.key,
                multiplicity: e.multiplicity,
                holders,
                holders_reliable,
            }
        })
        .collect();
    ReconOutcome {
        recovered,
        complete: peeled.complete,
        union_of_local,
    }
}

/// Relay-style n-party decode: correct the full sum `Z` with the caller's
/// own (unlabeled) sketch and list. Holder sets come from `Z`'s id bits.
pub fn reconcile_from_sum(
    own_set: &BTreeSet<u64>,
    z: &Sketch,
    n_participants: usize,
) -> Result<ReconOutcome> {
    let cfg = *z.config();
    let own = Sketch::from_keys(cfg, own_set, None)?;
    let corrected = local_correct(z, n_participants, &own)?;
    let f = *cfg.field();
    let n = f.scalar(n_participants as u64);
    let offset = |key: u64| {
        if own_set.contains(&key) {
            n
        } else {
            Scalar::ZERO
        }
    };
    Ok(decode_corrected(own_set, &corrected, Some(&offset)))
}
