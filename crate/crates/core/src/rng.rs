//! Counter-based seed derivation.
//!
//! A run has one root seed. Every consumer of randomness (split shuffling,
//! network initialization, rollouts, ...) gets its own stream keyed by a
//! purpose tag and a list of counters, so streams never depend on the order in
//! which other consumers drew numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for [`derive_seed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Split,
    Search,
    PolicyInit,
    PolicyTrain,
    ClassifierInit,
    ClassifierTrain,
    RandomSubsets,
    Rollout,
    Dqn,
    Evaluation,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Split => 0x5350_4c49,
            Purpose::Search => 0x5345_4152,
            Purpose::PolicyInit => 0x504f_4c49,
            Purpose::PolicyTrain => 0x504f_4c54,
            Purpose::ClassifierInit => 0x434c_4149,
            Purpose::ClassifierTrain => 0x434c_4154,
            Purpose::RandomSubsets => 0x5253_5542,
            Purpose::Rollout => 0x524f_4c4c,
            Purpose::Dqn => 0x4451_4e00,
            Purpose::Evaluation => 0x4556_414c,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `root`, `purpose` and `counters` into a 64-bit seed.
pub fn derive_seed(root: u64, purpose: Purpose, counters: &[u64]) -> u64 {
    let mut h = splitmix64(root ^ purpose.tag());
    for &c in counters {
        h = splitmix64(h ^ splitmix64(c));
    }
    h
}

pub fn rng_for(root: u64, purpose: Purpose, counters: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, purpose, counters))
}
