//! Deterministic seed derivation for per-path random streams.
//!
//! Each Monte Carlo path gets independent seeds for its latent path, its
//! sampling-time draws and its noise draws, derived from
//! `(master_seed, path_index, stream)` alone. Evaluation order therefore
//! never changes results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Latent = 1,
    Sampling = 2,
    Times = 3,
    Noise = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the master seed, path index and stream tag into one 64-bit seed.
pub fn derive_seed(master: u64, path_index: u64, stream: Stream) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ path_index.wrapping_mul(0xd6e8_feb8_6659_fd93));
    splitmix64(h ^ stream as u64)
}

pub fn rng_from_seed(seed: u64) -> PathRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The independent seeds used for one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathSeeds {
    pub latent: u64,
    pub sampling: u64,
    pub times: u64,
    pub noise: u64,
}

impl PathSeeds {
    pub fn derive(master: u64, path_index: u64) -> Self {
        Self {
            latent: derive_seed(master, path_index, Stream::Latent),
            sampling: derive_seed(master, path_index, Stream::Sampling),
            times: derive_seed(master, path_index, Stream::Times),
            noise: derive_seed(master, path_index, Stream::Noise),
        }
    }
}
