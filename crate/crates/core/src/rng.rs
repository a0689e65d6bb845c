//! Counter-keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose key is a
//! tuple of integers (seed, domain tag, indices...). Draws therefore do not
//! depend on the order in which arms are pulled or on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Pull = 1,
    BlockMean = 2,
    Algorithm = 3,
    Replicate = 4,
    MonteCarlo = 5,
    Clustering = 6,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a key tuple into a 256-bit ChaCha seed.
pub fn keyed_rng(seed: u64, domain: Domain, key: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ splitmix(domain as u64));
    for &k in key {
        h = splitmix(h ^ k.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    let mut bytes = [0u8; 32];
    let mut state = h;
    for chunk in bytes.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Derives a child seed, e.g. the seed of replicate `i` from a base seed.
pub fn derive_seed(seed: u64, domain: Domain, key: &[u64]) -> u64 {
    use rand::RngCore;
    keyed_rng(seed, domain, key).next_u64()
}
