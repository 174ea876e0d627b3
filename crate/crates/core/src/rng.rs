//! Seeded random substreams.
//!
//! Every stochastic unit of work (a bootstrap replicate, a simulated trial, a
//! cross-validation fold assignment) draws from its own ChaCha stream selected
//! by `(master seed, domain, index)`. Results therefore do not depend on how
//! work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-purpose tags so that, e.g., bootstrap replicate 3 and simulated trial 3
/// never share a stream under the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Bootstrap = 1,
    Rerandomization = 2,
    TrialReplicate = 3,
    FoldAssignment = 4,
    SyntheticCohort = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for unit `index` of `domain` under `master`.
pub fn substream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(domain as u64)));
    rng.set_stream(index);
    rng
}

/// Stable 64-bit key for a text identifier under a seed (FNV-1a, then mixed).
pub fn stable_hash(seed: u64, text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(h ^ splitmix64(seed))
}
