//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha20 stream keyed by
//! `(seed, index)` and tagged with a purpose, so draws for one purpose never
//! shift the draws of another (adding a factor leaves the noise unchanged,
//! permutation replicate `r` is the same however replicates are scheduled).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Purpose tag of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Latents = 1,
    NoiseX = 2,
    NoiseY = 3,
    Design = 4,
    Permutation = 5,
}

/// Independent generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}
