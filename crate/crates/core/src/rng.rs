//! Seed-derived random substreams.
//!
//! Every independent unit of work (one trajectory, one detection bin) draws
//! from its own ChaCha stream keyed by `(seed, stream index)`, so results do
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED_B0B1_2012_0001;

pub type Stream = ChaCha8Rng;

pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Index space reserved for a named purpose, so that e.g. initial-condition
/// sampling and event generation never share a stream for the same seed.
pub fn tagged(tag: u32, index: u32) -> u64 {
    (u64::from(tag) << 32) | u64::from(index)
}
