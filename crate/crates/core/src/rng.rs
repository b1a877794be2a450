//! Counter-based random streams.
//!
//! Every replica, coloring block or resampled point draws from a ChaCha
//! stream addressed by `(seed, index)`, so results never depend on how work
//! is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Colorings are drawn in fixed-size blocks, one stream per block.
pub const BLOCK: u64 = 512;

/// Stream `index` of the generator keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent child seed; used to key nested streams
/// (replica -> colorings, sampling -> duplicate resampling, ...).
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Splits `m` draws into `(block index, size)` pairs.
pub fn blocks(m: u64) -> impl Iterator<Item = (u64, u64)> {
    let count = m.div_ceil(BLOCK);
    (0..count).map(move |b| (b, BLOCK.min(m - b * BLOCK)))
}
