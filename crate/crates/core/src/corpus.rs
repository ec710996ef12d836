//! Seeded random QUBO models for tests and benchmarks.

use rand::Rng;

use crate::qubo::{QuboBuilder, QuboModel};
use crate::rng::{derive_seed, stream_rng};

/// Random model over `n` variables. Each pair is present with probability
/// `density`; every variable gets a linear term. Half the models use small
/// integer coefficients (which produce many ties), the rest uniform reals
/// in `[-1, 1)`.
pub fn random_model(seed: u64, n: usize, density: f64) -> QuboModel {
    let mut rng = stream_rng(seed, 0x636f_7270);
    let integral = rng.random::<bool>();
    let coeff = |rng: &mut crate::rng::SolverRng| {
        if integral {
            rng.random_range(-5i32..=5) as f64
        } else {
            rng.random_range(-1.0..1.0)
        }
    };
    let mut b = QuboBuilder::new(n);
    for i in 0..n {
        let c = coeff(&mut rng);
        b.add_linear(i, c);
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let c = coeff(&mut rng);
                b.add_quadratic(i, j, c);
            }
        }
    }
    b.build()
}

/// `count` models with sizes cycling through `min_n..=max_n` and densities
/// cycling through sparse, medium and dense.
pub fn random_corpus(seed: u64, count: usize, min_n: usize, max_n: usize) -> Vec<QuboModel> {
    assert!(min_n <= max_n);
    let densities = [0.2, 0.5, 0.9];
    let span = max_n - min_n + 1;
    (0..count)
        .map(|k| {
            let n = min_n + k % span;
            let density = densities[(k / span) % densities.len()];
            random_model(derive_seed(seed, k as u64), n, density)
        })
        .collect()
}
