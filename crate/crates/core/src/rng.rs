//! Seeded generator streams. Every consumer derives its generator from
//! `(seed, lane, index)`, so results never depend on worker scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const LANE_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent generator for work item `index` of consumer `lane`.
pub fn stream(seed: u64, lane: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ lane.wrapping_add(1).wrapping_mul(LANE_MIX));
    rng.set_stream(index);
    rng
}
