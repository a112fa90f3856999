//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `(seed, stream)` pair so callers
//! can split work into independent substreams without sharing generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`. Stream 0 is the plain seeded generator.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
