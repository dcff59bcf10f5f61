//! Seed derivation for reproducible, order-independent randomness.
//!
//! Every random decision in the crate draws from a `ChaCha8Rng` whose seed
//! is derived from the master seed plus a fixed tag path, e.g.
//! `(master, EVAL, generation, slot)`. Two consequences:
//!
//! * replaying a run with the same seed reproduces every stream exactly,
//! * streams attached to different work items never share state, so the
//!   result cannot depend on scheduling or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Keep values stable: they are part of the on-disk
/// reproducibility contract.
pub const TAG_INIT: u64 = 1;
pub const TAG_PARAMS: u64 = 2;
pub const TAG_OFFSPRING: u64 = 3;
pub const TAG_EVAL: u64 = 4;
pub const TAG_VALIDATE_PARAMS: u64 = 5;
pub const TAG_VALIDATE_EVAL: u64 = 6;
pub const TAG_RUN: u64 = 7;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with a tag path into one 64-bit stream seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ 0xA076_1D64_78BD_642F);
    for &t in tags {
        h = splitmix64(h ^ t.wrapping_mul(0x2545_F491_4F6C_DD1D));
    }
    h
}

/// Stream for a derived seed path.
pub fn stream(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tags))
}
