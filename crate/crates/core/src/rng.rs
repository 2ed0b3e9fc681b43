//! Labeled random streams derived from a single global seed.
//!
//! Every consumer of randomness gets its own ChaCha stream, so adding draws
//! in one place never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    FeaturePool = 1,
    NegativeSampling = 2,
    Subsampling = 3,
    Synthetic = 4,
}

/// Returns the generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
