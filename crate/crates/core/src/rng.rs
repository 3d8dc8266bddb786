//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! `(seed, domain)` pair and positioned on a stream selected by an index. A
//! trial's randomness therefore depends only on its index, never on which
//! worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Distinct key domains so that unrelated consumers of the same seed never
/// share a stream.
pub mod domain {
    pub const SPREADING: u64 = 0x5350_5245_4144;
    pub const TRANSMIT: u64 = 0x5452_414e_534d;
    pub const TRIAL: u64 = 0x5452_4941_4c00;
    pub const INITIAL: u64 = 0x494e_4954_0000;
    pub const AUDIT: u64 = 0x4155_4449_5400;
    pub const CHANNEL: u64 = 0x4348_414e_0000;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `(seed, domain)` positioned on stream `index`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut state = seed ^ domain.rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Packs two indices into one stream id. `hi` is expected to be small
/// (a sweep point or detector index).
pub fn pack(hi: u64, lo: u64) -> u64 {
    (hi << 40) ^ lo
}
