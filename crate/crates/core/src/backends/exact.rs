use super::{BackendError, Capability, Sampler};
use crate::qubo::{QuboModel, Sample, SampleRecord, SampleSet};

/// Largest model [`exact_solve`] accepts.
pub const EXACT_MAX_VARS: usize = 24;

const RESYNC_PERIOD: u64 = 1 << 12;

/// Global minimum by exhaustive enumeration in Gray-code order, one
/// incremental flip per step. Energies within a small tolerance of the best
/// are re-evaluated exactly, so ties are broken bit-lexicographically on
/// exact values rather than on accumulated rounding.
pub fn exact_solve(model: &QuboModel) -> Result<SampleRecord, BackendError> {
    let n = model.num_variables();
    if n > EXACT_MAX_VARS {
        return Err(BackendError::Capacity {
            n,
            max: EXACT_MAX_VARS,
        });
    }
    let scale: f64 = model.offset().abs()
        + model.linear_terms().values().map(|c| c.abs()).sum::<f64>()
        + model.quadratic_terms().values().map(|c| c.abs()).sum::<f64>();
    let tol = 1e-9 * (1.0 + scale);

    let mut bits = vec![0u8; n];
    let mut field = model.local_fields(&bits);
    let mut energy = model.offset();
    let mut best_bits = bits.clone();
    let mut best_exact = energy;

    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let delta = if bits[i] == 0 { field[i] } else { -field[i] };
        bits[i] ^= 1;
        let sign = if bits[i] == 1 { 1.0 } else { -1.0 };
        for &(j, q) in model.neighbors(i) {
            field[j] += sign * q;
        }
        energy += delta;
        if step % RESYNC_PERIOD == 0 {
            energy = model.energy_of(&bits);
            field = model.local_fields(&bits);
        }
        if energy < best_exact + tol {
            let exact = model.energy_of(&bits);
            if exact < best_exact || (exact == best_exact && bits < best_bits) {
                best_exact = exact;
                best_bits.copy_from_slice(&bits);
            }
        }
    }
    let sample = Sample::new(best_bits).expect("binary");
    Ok(SampleRecord::new(model, sample)?)
}

/// [`exact_solve`] as a backend; returns the optimum once, with
/// `occurrences = num_reads`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactBackend;

impl Sampler for ExactBackend {
    fn name(&self) -> &str {
        "exact"
    }

    fn capability(&self) -> Capability {
        Capability {
            max_vars: Some(EXACT_MAX_VARS),
            exact: true,
        }
    }

    fn sample(&self, model: &QuboModel, num_reads: usize, _seed: u64) -> Result<SampleSet, BackendError> {
        let best = exact_solve(model)?.with_occurrences(num_reads.max(1) as u64);
        Ok(SampleSet::from_records(model, vec![best])?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::random_corpus;
    use crate::qubo::QuboBuilder;
    use crate::testutil::exhaustive_minimum;

    #[test]
    fn empty_model_is_all_zeros() {
        let mut b = QuboBuilder::new(5);
        b.add_offset(-2.0);
        let r = exact_solve(&b.build()).unwrap();
        assert_eq!(r.sample, Sample::zeros(5));
        assert_eq!(r.energy, -2.0);
        let r0 = exact_solve(&QuboModel::empty(0)).unwrap();
        assert!(r0.sample.is_empty());
    }

    #[test]
    fn two_variable_example() {
        let mut b = QuboBuilder::new(2);
        b.add_linear(0, 1.0).add_linear(1, -2.0).add_quadratic(0, 1, 3.0);
        let r = exact_solve(&b.build()).unwrap();
        assert_eq!(r.sample.bits(), &[0, 1]);
        assert_eq!(r.energy, -2.0);
    }

    #[test]
    fn ties_go_to_lexicographically_smallest() {
        // x0 and x1 interchangeable: optima [0,1] and [1,0].
        let mut b = QuboBuilder::new(2);
        b.add_linear(0, -1.0).add_linear(1, -1.0).add_quadratic(0, 1, 2.0);
        let r = exact_solve(&b.build()).unwrap();
        assert_eq!(r.sample.bits(), &[0, 1]);
    }

    #[test]
    fn cap_is_enforced() {
        let err = exact_solve(&QuboModel::empty(25)).unwrap_err();
        assert_eq!(err, BackendError::Capacity { n: 25, max: 24 });
    }

    #[test]
    fn agrees_with_truth_table() {
        for m in random_corpus(17, 120, 1, 14) {
            let r = exact_solve(&m).unwrap();
            let (s, e) = exhaustive_minimum(&m);
            assert_eq!(r.sample, s);
            assert!((r.energy - e).abs() <= 1e-12);
        }
    }
}
