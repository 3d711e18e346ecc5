//! Per-run random streams.
//!
//! Each consumer draws from its own ChaCha stream keyed by the run seed, so
//! adding draws in one consumer never shifts the numbers another one sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    ActorInit = 1,
    CriticInit = 2,
    ApfInit = 3,
    Exploration = 4,
    ReplaySampling = 5,
    TrajectorySampling = 6,
    ApfShuffle = 7,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// A seed for network initialization derived from the run seed.
pub fn init_seed(seed: u64, which: Stream) -> u64 {
    use rand::RngCore;
    stream(seed, which).next_u64()
}
