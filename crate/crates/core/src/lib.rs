//! Network-dependent block reward schedule and an agent-based proof-of-work
//! network simulator built around it.
//!
//! The reward rises with network difficulty on the low side (so a crowded
//! network pays more than an empty one) and is cut off by a logistic factor
//! on the high side (so piling on more hashrate stops paying). The
//! [`simulator`] couples that schedule to a difficulty retarget loop and a
//! population of economic miners, with a participation credit that scales
//! the reward a block winner can claim.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line runner and seed sweeps live in the `pom-sim` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agents;
pub mod config;
pub mod difficulty;
mod error;
pub mod metrics;
pub mod reward;
pub mod search;
pub mod simulator;

pub use crate::error::{Error, Result};
