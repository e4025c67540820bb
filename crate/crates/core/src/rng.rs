//! Hierarchical random substreams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream keyed by
//! `(master_seed, role, index)`. Two runs with the same master seed see the
//! same traffic regardless of which policy consumes it, and any single
//! content can be regenerated without replaying the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Role {
    Arrivals = 1,
    Content = 2,
    CoverageProbe = 3,
}

pub fn substream(master_seed: u64, role: Role, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(role as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw on `(0, 1]`, the domain of the inverse-CDF samplers.
pub fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
