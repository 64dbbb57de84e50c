//! Seeded random streams.
//!
//! A chain with seed `s` uses a single ChaCha20 key derived from `s`. Stream 0
//! feeds the acceptance uniforms; proposal `k` (zero-based, counting from the
//! start of initialization) draws from stream `k + 1`. Proposals can therefore
//! be generated out of order or in parallel without changing the chain.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// One step of the splitmix64 generator.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of chain `index` in a multi-chain run: `splitmix64(base + index)`.
pub fn derive_chain_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index))
}

pub fn acceptance_stream(seed: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

pub fn proposal_stream(seed: u64, k: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(k + 1);
    rng
}
