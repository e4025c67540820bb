//! Simulation of spatial multi-LRU edge caching.
//!
//! Stations on a square lattice each hold an LRU inventory of `K` objects.
//! A user may be covered by several stations; the multi-LRU policies let it
//! search all of them, differing in how many replicas a miss inserts. The
//! crate generates traffic with temporal locality, replays it through the
//! policies and the comparison baselines, and reports hit probabilities.

// NaN must fail parameter checks, hence `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod config;
pub mod coverage;
pub mod engine;
mod error;
pub mod format;
pub mod geom;
pub mod metrics;
pub mod policies;
pub mod rng;
pub mod traffic;

pub use error::{Error, Result};
