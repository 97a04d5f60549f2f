//! Seed-derived random streams.
//!
//! Every run owns a handful of ChaCha streams derived from the same run seed.
//! Keeping the splits on their own streams means that turning features on or
//! off (e.g. the adaptive local-search gate) cannot perturb draws made
//! elsewhere in the run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream consumed by the evolutionary loop itself.
pub const STREAM_EVOLUTION: u64 = 0;
/// Stream consumed by the outer train/test split.
pub const STREAM_OUTER_SPLIT: u64 = 1;
/// Stream consumed by the inner fit/validation split.
pub const STREAM_INNER_SPLIT: u64 = 2;

/// A ChaCha generator positioned on `stream`, seeded from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
