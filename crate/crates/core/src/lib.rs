//! Multi-party set reconciliation with invertible Bloom lookup tables whose
//! cells hold sums over a prime field.
//!
//! ```
//! use std::collections::BTreeSet;
//! use mprecon::{difference_two, size_for, Sketch, SketchConfig};
//!
//! let cells = size_for(10, 4, 0.3, false)?;
//! let cfg = SketchConfig::with_cells(1_000_000_007, 1 << 32, 4, cells, 11, 12)?;
//! let alice: BTreeSet<u64> = (0..1000).collect();
//! let bob: BTreeSet<u64> = (5..1003).collect();
//! let from_bob = Sketch::from_keys(cfg, &bob, None)?;
//! let outcome = difference_two(&alice, &from_bob)?;
//! assert!(outcome.complete);
//! assert_eq!(outcome.union_of_local, &alice | &bob);
//! # Ok::<(), mprecon::Error>(())
//! ```

pub mod error;
pub mod experiment;
pub mod field;
pub mod hashing;
pub mod netsim;
pub mod protocol;
pub mod sketch;

pub use error::{Error, Result};
pub use field::{is_prime, FVector, FieldParams, Scalar};
pub use hashing::HashConfig;
pub use protocol::{
    combine_general, difference_two, local_correct, Combo, ReconOutcome, RecoveredKey,
};
pub use sketch::{
    refine_halves, size_for, PartyBits, PeelEntry, PeelResult, Sketch, SketchConfig, SketchHalf,
};
