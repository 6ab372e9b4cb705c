//! Seeded randomness. Everything in the pipeline draws from a counter-based
//! ChaCha8 stream so that a 64-bit seed pins down every artifact exactly;
//! independent stages run on separate stream ids of the same seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in manifests next to each seed.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Stream ids for the independent stages of a run.
pub mod stream {
    pub const DATA: u64 = 1;
    pub const MODEL_INIT: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const PROBE: u64 = 4;
    pub const EVAL: u64 = 5;
}

pub type SeedRng = ChaCha8Rng;

/// RNG for a given 64-bit seed, on the default stream.
pub fn from_seed(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for a (seed, stream) pair. Streams never overlap for a fixed seed.
pub fn from_seed_stream(seed: u64, stream_id: u64) -> SeedRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id.into());
    rng
}
