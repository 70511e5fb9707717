//! Seeding for reproducible runs and replica streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replica `r`: `seed ⊕ splitmix64(r)`. Replica 0 of seed `s` is
/// what a single run with seed `s` uses.
pub fn replica_seed(seed: u64, replica: u64) -> u64 {
    seed ^ splitmix64(replica)
}

pub fn rng_for(seed: u64, replica: u64) -> SimRng {
    SimRng::seed_from_u64(replica_seed(seed, replica))
}

/// Standard exponential variate.
pub(crate) fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.random::<f64>()).ln()
}

/// Uniform on `[0, x)`.
pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, x: f64) -> f64 {
    rng.random::<f64>() * x
}
