//! Derived deterministic RNG streams.
//!
//! Every stochastic draw in the crate flows from a stream derived by
//! hashing a base seed together with a context path (image id, distortion
//! name, purpose). Workers can therefore process items in any order, or in
//! parallel, and still produce byte-identical output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic stream for `(seed, context...)`. Context pieces are
/// length-prefixed before hashing so that `["ab", "c"]` and `["a", "bc"]`
/// derive different streams.
pub fn derive_stream(seed: u64, context: &[&str]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for piece in context {
        hasher.update((piece.len() as u64).to_le_bytes());
        hasher.update(piece.as_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Collapses `(seed, context...)` into a derived 64-bit seed, for records
/// that persist the seed of a sub-stream.
pub fn derive_seed(seed: u64, context: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for piece in context {
        hasher.update((piece.len() as u64).to_le_bytes());
        hasher.update(piece.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
