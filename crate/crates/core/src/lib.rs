//! Multiplicative sets of integers.

// `!(x >= lo)` is the NaN-rejecting form of argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod asymptotics;
pub mod cache;
pub mod dd;
pub mod ek;
pub mod error;
pub mod lfun;
pub mod mangoldt;
pub mod par;
pub mod races;
pub mod setspec;
pub mod sieve;
pub mod tau;

pub use error::{Error, Result};
