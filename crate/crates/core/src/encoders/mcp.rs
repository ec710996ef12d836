use super::{DecodedSolution, EncodeError, Encoding, NativeSolution, VarSlot};
use crate::problems::{McpInstance, ProblemInstance, ProblemKind};
use crate::qubo::{QuboBuilder, QuboModel, Sample};

/// One variable per node; energy is minus the cut weight:
/// `-sum_(i,j,w) w (x_i + x_j - 2 x_i x_j)`.
pub fn encode_mcp(inst: &McpInstance) -> Result<(QuboModel, Encoding), EncodeError> {
    inst.validate()
        .map_err(|e| EncodeError::Invalid(e.to_string()))?;
    if inst.n < 2 {
        return Err(EncodeError::Degenerate(format!("max-cut needs at least 2 nodes, got {}", inst.n)));
    }
    let mut b = QuboBuilder::new(inst.n);
    for &(i, j, w) in &inst.edges {
        b.add_linear(i, -w).add_linear(j, -w).add_quadratic(i, j, 2.0 * w);
    }
    let mut enc = Encoding::new(
        ProblemKind::Mcp,
        (0..inst.n).map(|node| VarSlot::CutSide { node }).collect(),
        ProblemInstance::Mcp(inst.clone()).fingerprint(),
    );
    enc.objective_scale = -1.0;
    Ok((b.build(), enc))
}

/// Every sample is a valid partition.
pub fn decode_mcp(
    enc: &Encoding,
    sample: &Sample,
    inst: &McpInstance,
) -> Result<DecodedSolution, EncodeError> {
    enc.check_kind(ProblemKind::Mcp)?;
    enc.check_sample(sample)?;
    let side = sample.bits().to_vec();
    let cut = inst.cut_value(&side);
    Ok(DecodedSolution::feasible(NativeSolution::Partition(side), cut))
}

pub fn mcp_sample(side: &[u8]) -> Sample {
    Sample::new(side.to_vec()).expect("partition sides are 0/1")
}
