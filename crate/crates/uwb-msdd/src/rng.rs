//! Deterministic RNG stream splitting.
//!
//! Every stochastic component draws from a ChaCha stream derived from the
//! master seed plus a small tuple of tags (point index, burst index, purpose).
//! Splitting is a pure function of `(master, tags)`, which is what makes
//! sweeps bit-reproducible independent of worker count or scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose tags keep independent draws from ever sharing a stream.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Channel = 1,
    Noise = 2,
    Data = 3,
    Interleaver = 4,
    Aux = 5,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from the master seed and tags (for components that
/// take a plain `u64` seed and split further internally).
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master ^ 0x243f_6a88_85a3_08d3;
    for &t in tags {
        state ^= splitmix64(&mut state) ^ t.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
    splitmix64(&mut state)
}

/// Derives an independent ChaCha12 stream from the master seed and tags.
pub fn substream(master: u64, tags: &[u64]) -> ChaCha12Rng {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut seed = [0u8; 32];
    // Fold the tags into the splitmix state, then squeeze 32 bytes.
    for &t in tags {
        state ^= splitmix64(&mut state) ^ t.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
