//! Splits one run seed into independent random streams.
//!
//! Each consumer gets `ChaCha8Rng::seed_from_u64(seed)` switched to its own
//! ChaCha stream id, so streams never overlap and two runs that share a
//! seed differ only through what the algorithms do with their draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Episode reset seeds during training.
    Env = 1,
    /// Network initialization seed.
    Init = 2,
    /// Replay sampling.
    Replay = 3,
    /// Epsilon-greedy draws.
    Explore = 4,
    /// Base seeds for evaluation games.
    Eval = 5,
}

pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
