//! Seeded generators. Each consumer draws from its own ChaCha stream, so one
//! user seed shared by a generator and a split yields unrelated sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const SPLIT: u64 = 1;
pub(crate) const LONGTAIL: u64 = 2;
pub(crate) const RANDOM_GRAPH: u64 = 3;
pub(crate) const SYNTH: u64 = 4;
pub(crate) const CLASSIFIER: u64 = 5;
pub(crate) const UNIFORM: u64 = 6;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
