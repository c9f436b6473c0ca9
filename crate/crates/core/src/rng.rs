//! Deterministic seeding helpers.
//!
//! Edge indicators come from a stateless counter-based generator keyed by
//! (seed, edge index), so a network is a pure function of (params, seed)
//! no matter how generation is scheduled. Memberships and other variable
//! length draws use a ChaCha8 stream keyed by (seed, domain).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EDGE_DOMAIN: u64 = 0x4544_4745; // "EDGE"
const MEMBERSHIP_DOMAIN: u64 = 0x4d45_4d42; // "MEMB"
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in [0, 1) for edge `idx` under `seed`.
#[inline]
pub fn edge_unit(seed: u64, idx: u64) -> f64 {
    let z = mix64(mix64(seed ^ EDGE_DOMAIN) ^ idx.wrapping_add(1).wrapping_mul(GOLDEN));
    let z = mix64(z);
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Linear index of the upper-triangle pair (i, j), i < j.
#[inline]
pub fn edge_index(n: usize, i: usize, j: usize) -> u64 {
    debug_assert!(i < j && j < n);
    (i * n + j) as u64
}

/// ChaCha8 stream keyed by (seed, domain).
pub fn keyed_stream(seed: u64, domain: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut z = mix64(seed ^ domain);
    for chunk in key.chunks_exact_mut(8) {
        z = mix64(z.wrapping_add(GOLDEN));
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stream for membership sampling under `seed`.
pub fn membership_stream(seed: u64) -> ChaCha8Rng {
    keyed_stream(seed, MEMBERSHIP_DOMAIN)
}

/// Derived seed for a (cell, replication) slot of an experiment, so worker
/// scheduling cannot change which random stream a replication sees.
pub fn derive_seed(master: u64, cell: u64, rep: u64) -> u64 {
    mix64(mix64(master ^ mix64(cell.wrapping_add(GOLDEN))) ^ rep.wrapping_mul(GOLDEN))
}
