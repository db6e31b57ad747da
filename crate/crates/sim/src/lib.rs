//! File formats, seed sweeps and the command-line runner built on
//! [`pom_core`].

pub mod artifacts;
pub mod compare;
pub mod config;
pub mod curve;
pub mod error;
pub mod sweep;

pub use error::{Result, RunError};
