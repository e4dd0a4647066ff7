//! Counter-based random streams: one ChaCha20 key per seed, one stream id per
//! independent trajectory or work chunk.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
