//! Group-sparse compressed sensing: norms and their proximal maps, exact
//! group-RIP certification, recovery-bound evaluation, a primal–dual
//! recovery solver, sample-size planning, and an experiment harness tying
//! them together.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
mod dd;
pub mod error;
pub mod groups;
pub mod harness;
pub mod lemmas;
pub mod norms;
pub mod par;
pub mod rng;
pub mod samplesize;
pub mod sensing;
pub mod solver;

pub use error::{Error, Result};
