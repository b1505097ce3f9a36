//! Seeded random streams.
//!
//! ChaCha is a counter-based generator: a `(seed, stream)` pair addresses an
//! independent keystream, so batches split by stream index reproduce bit for
//! bit no matter how they are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    stream(seed, 0)
}

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
