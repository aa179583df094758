//! Finite-depth machinery for binary expansions whose digit-1 positions avoid
//! long arithmetic progressions.
//!
//! Everything here is a pure function of its inputs and works without `std`:
//!
//! * [`word`]: fixed-length binary words, progression detection, shift and
//!   subsequence relations.
//! * [`enumeration`]: pruned depth-first counting and streaming of k-AP-free
//!   words, extremal one-counts, binomial/entropy comparators and box-count
//!   tables.
//! * [`dyadic`]: addition mod 1, the OR/AND carry decomposition of a sum,
//!   products, and exhaustive pair scans over AP-free words.
//! * [`grid`]: membership masks over depth-n dyadic cells and their outer
//!   approximated sums, scaled sums and products.
//! * [`vdw`]: exact mixed van der Waerden numbers with coloring certificates.
//! * [`density`]: density estimators on finite integer sequences and the two
//!   window-concatenation reductions.
//!
//! Parallel drivers, file formats and the command line live in the `apfree`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod density;
pub mod dyadic;
pub mod enumeration;
pub mod grid;
#[cfg(feature = "serde")]
mod ser;
pub mod vdw;
pub mod word;

pub use density::{DensityError, DensityReport, IntSeq};
pub use dyadic::{SumDecomposition, WCertificate};
pub use enumeration::{BudgetExceeded, CountTable, Enumerator};
pub use grid::{DyadicGrid, GridError, MaskSpec};
pub use vdw::{Coloring, VdwError, VdwOutcome};
pub use word::{BinaryWord, LongestAp, Progression, WordError};

/// Default node budget for every pruned search.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;
