//! Brute-force helpers shared by unit tests. The energy here is evaluated
//! straight from the term maps so it does not share code with the model's
//! own evaluation paths.

use crate::qubo::{QuboModel, Sample};

pub fn term_energy(model: &QuboModel, bits: &[u8]) -> f64 {
    let mut e = model.offset();
    for (&i, &c) in model.linear_terms() {
        e += c * bits[i] as f64;
    }
    for (&(i, j), &c) in model.quadratic_terms() {
        e += c * (bits[i] * bits[j]) as f64;
    }
    e
}

/// Truth-table minimum, ties broken bit-lexicographically.
pub fn exhaustive_minimum(model: &QuboModel) -> (Sample, f64) {
    let n = model.num_variables();
    assert!(n <= 24, "truth table too large");
    let mut best: Option<(Sample, f64)> = None;
    for mask in 0u64..(1u64 << n) {
        let s = Sample::from_mask(mask, n);
        let e = term_energy(model, s.bits());
        let better = match &best {
            None => true,
            Some((bs, be)) => e < *be || (e == *be && s < *bs),
        };
        if better {
            best = Some((s, e));
        }
    }
    best.unwrap()
}
