//! Seeded randomness.
//!
//! Every stochastic component draws from ChaCha8 (`rand_chacha`), a portable
//! counter-based generator: the same `(seed, stream)` pair yields the same
//! sequence on every platform. Independent runs (annealing reads, portfolio
//! branches, HSS threads) use distinct streams of one seed, so their outputs
//! do not depend on how they are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qubo::Sample;

pub type SolverRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 mix of `seed` and `salt`, for deriving child seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniformly random assignment of `n` bits.
pub fn random_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Sample {
    Sample::from_bools((0..n).map(|_| rng.random::<bool>()))
}
