//! Per-run random streams.
//!
//! Every run index gets its own ChaCha8 stream keyed by the master seed, so
//! a run's draws do not depend on which worker executes it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream in a separate family (e.g. kernel sampling) that never collides
/// with the per-run streams for the same seed.
pub fn tagged_stream(seed: u64, tag: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index);
    rng
}
