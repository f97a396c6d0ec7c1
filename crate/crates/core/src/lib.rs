//! Residual packet loss and loss burstiness under block erasure coding.
//!
//! An (n + k, k) block erasure code protects n data packets with k redundancy
//! packets; the block decodes cleanly whenever any n of the n + k packets
//! arrive. Under Bernoulli network loss with per-packet probability p, this
//! crate computes, analytically and exactly up to float rounding:
//!
//! - the per-block distribution of unrecoverable losses and the residual
//!   per-packet loss rate ([`erasure`]),
//! - the expected length of consecutive losses within a single block, with an
//!   exhaustive oracle ([`single_block`]),
//! - the expected length of consecutive losses across an unbounded stream of
//!   blocks, as a truncated series with a closed-form tail bound
//!   ([`multiblock`]),
//! - and a seeded Monte Carlo simulator measuring all of the above
//!   empirically ([`simulator`]).
//!
//! Counting is exact ([`combinatorics`] uses arbitrary-precision integers);
//! probabilities are computed in a caller-chosen float width via the
//! [`Real`] scalar trait, with `f64` aliases exported at the crate root.

pub mod combinatorics;
pub mod erasure;
pub mod multiblock;
pub mod scalar;
pub mod simulator;
pub mod single_block;

mod error;

pub use error::{Error, Result};
pub use scalar::Real;

pub use erasure::{CodeParams, LossProbability, UnrecoverableDistribution};

/// `f64` instantiations; the precision the CLI and the test suite run at.
pub type LossProbability64 = LossProbability<f64>;
pub type UnrecoverableDistribution64 = UnrecoverableDistribution<f64>;
pub type TruncatedResult64 = multiblock::TruncatedResult<f64>;
pub type SimConfig64 = simulator::SimConfig<f64>;
pub type BurstReport64 = simulator::BurstReport<f64>;
