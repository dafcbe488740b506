//! Shared instances for the benchmarks.

use dfep::data::{random_instance, RandomSpec};
use dfep::Instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic complete binary instance.
pub fn random_binary(objects: usize, tests: usize, classes: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(&mut rng, RandomSpec::binary(objects, tests, classes)).expect("valid spec")
}
