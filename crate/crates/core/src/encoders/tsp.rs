use super::{DecodedSolution, EncodeError, Encoding, NativeSolution, VarSlot};
use crate::problems::{ProblemInstance, ProblemKind, TspInstance};
use crate::qubo::{QuboBuilder, QuboModel, Sample};

/// Position encoding: `x[v][p] = 1` iff node `v` is visited at position `p`.
/// Variable index is `v * n + p`.
pub fn encode_tsp(inst: &TspInstance) -> Result<(QuboModel, Encoding), EncodeError> {
    inst.validate()
        .map_err(|e| EncodeError::Invalid(e.to_string()))?;
    let n = inst.num_nodes();
    if n < 3 {
        return Err(EncodeError::Degenerate(format!("tsp needs at least 3 nodes, got {n}")));
    }
    let var = |v: usize, p: usize| v * n + p;
    let penalty = n as f64 * inst.max_distance() + 1.0;

    let mut b = QuboBuilder::new(n * n);
    for v in 0..n {
        let row: Vec<(usize, f64)> = (0..n).map(|p| (var(v, p), 1.0)).collect();
        b.add_squared_penalty(&row, 1.0, penalty);
    }
    for p in 0..n {
        let col: Vec<(usize, f64)> = (0..n).map(|v| (var(v, p), 1.0)).collect();
        b.add_squared_penalty(&col, 1.0, penalty);
    }
    for p in 0..n {
        let q = (p + 1) % n;
        for u in 0..n {
            for v in 0..n {
                if u != v && inst.dist[u][v] != 0.0 {
                    b.add_quadratic(var(u, p), var(v, q), inst.dist[u][v]);
                }
            }
        }
    }

    let slots = (0..n)
        .flat_map(|node| (0..n).map(move |position| VarSlot::TspVisit { node, position }))
        .collect();
    let mut enc = Encoding::new(
        ProblemKind::Tsp,
        slots,
        ProblemInstance::Tsp(inst.clone()).fingerprint(),
    );
    enc.penalties.insert("one_hot".into(), penalty);
    Ok((b.build(), enc))
}

pub fn decode_tsp(
    enc: &Encoding,
    sample: &Sample,
    inst: &TspInstance,
) -> Result<DecodedSolution, EncodeError> {
    enc.check_kind(ProblemKind::Tsp)?;
    enc.check_sample(sample)?;
    let n = inst.num_nodes();
    let mut tour = vec![usize::MAX; n];
    for v in 0..n {
        let mut positions = (0..n).filter(|&p| sample.get(v * n + p) == 1);
        match (positions.next(), positions.next()) {
            (Some(p), None) if tour[p] == usize::MAX => tour[p] = v,
            _ => return Ok(DecodedSolution::infeasible()),
        }
    }
    Ok(match inst.tour_length(&tour) {
        Some(len) => DecodedSolution::feasible(NativeSolution::Tour(tour), len),
        None => DecodedSolution::infeasible(),
    })
}

/// Sample representing the closed tour `tour`.
pub fn tsp_sample(enc: &Encoding, tour: &[usize]) -> Sample {
    let mut s = Sample::zeros(enc.num_variables());
    for (position, &node) in tour.iter().enumerate() {
        let var = enc
            .var(VarSlot::TspVisit { node, position })
            .expect("tour node within instance");
        s.set(var, true);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::brute;
    use crate::testutil::exhaustive_minimum;

    fn unit3() -> TspInstance {
        TspInstance::new(
            "unit3",
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
        )
        .unwrap()
    }

    fn square4() -> TspInstance {
        TspInstance::new(
            "square4",
            vec![
                vec![0.0, 1.0, 10.0, 1.0],
                vec![1.0, 0.0, 1.0, 10.0],
                vec![10.0, 1.0, 0.0, 1.0],
                vec![1.0, 10.0, 1.0, 0.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_tiny_instances() {
        let two = TspInstance::new("two", vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(encode_tsp(&two), Err(EncodeError::Degenerate(_))));
    }

    #[test]
    fn every_feasible_unit_tour_has_length_three() {
        let inst = unit3();
        let (model, enc) = encode_tsp(&inst).unwrap();
        assert_eq!(model.num_variables(), 9);
        let mut feasible = 0;
        for mask in 0u64..(1 << 9) {
            let s = Sample::from_mask(mask, 9);
            let d = decode_tsp(&enc, &s, &inst).unwrap();
            if d.feasible {
                feasible += 1;
                assert_eq!(d.objective, Some(3.0));
                assert_eq!(model.energy(&s).unwrap(), enc.expected_energy(3.0));
            }
        }
        assert_eq!(feasible, 6);
    }

    #[test]
    fn square_optimum_is_four() {
        let inst = square4();
        let (model, enc) = encode_tsp(&inst).unwrap();
        assert_eq!(model.num_variables(), 16);
        let (best, energy) = exhaustive_minimum(&model);
        let d = decode_tsp(&enc, &best, &inst).unwrap();
        assert!(d.feasible);
        assert_eq!(d.objective, Some(4.0));
        assert_eq!(energy, 4.0);
        assert_eq!(brute::tsp_optimum(&inst).1, 4.0);
    }

    #[test]
    fn identity_and_empty_samples() {
        let inst = square4();
        let (model, enc) = encode_tsp(&inst).unwrap();
        let s = tsp_sample(&enc, &[0, 1, 2, 3]);
        let d = decode_tsp(&enc, &s, &inst).unwrap();
        assert_eq!(d.native, Some(NativeSolution::Tour(vec![0, 1, 2, 3])));
        assert_eq!(d.objective, Some(4.0));
        assert_eq!(model.energy(&s).unwrap(), 4.0);

        let zero = decode_tsp(&enc, &Sample::zeros(16), &inst).unwrap();
        assert!(!zero.feasible);
        assert_eq!(zero.objective, None);
        assert!(decode_tsp(&enc, &Sample::zeros(3), &inst).is_err());
    }
}
