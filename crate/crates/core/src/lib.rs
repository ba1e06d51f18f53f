//! Step-budgeted subsets of and functions on the natural numbers, with exact
//! partial densities and the explicit coding, permutation, trace and gap
//! constructions used to study intrinsic smallness.
//!
//! Everything here is deterministic: evaluation is driven by an abstract step
//! budget rather than wall-clock time, and every density is an exact rational.
//! Limits (upper/lower density, suprema over permutations) are never claimed;
//! the crate computes finite-prefix quantities and checks the inequalities that
//! bound them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the CLI live
//! in the `density-forge` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod arith;
pub mod arrays;
mod budget;
pub mod coding;
pub mod density;
pub mod describe;
pub mod forge;
pub mod oracle_sim;
pub mod set_calculus;

pub use budget::{Budget, Delay, Nat, DEFAULT_BUDGET};
pub use num_rational::Ratio;

/// Exact density value. Numerator and denominator are reduced.
pub type Density = Ratio<u64>;

/// `count / n` as an exact rational. `n` must be positive.
pub fn ratio(count: u64, n: u64) -> Density {
    Ratio::new(count, n)
}
