//! QUBO encodings of the four benchmark problem classes and the matching
//! decoders back to native solutions.
//!
//! Every encoding is exact on feasible samples: for a feasible sample,
//! `energy = objective_scale * objective + objective_constant`. Penalty weights
//! are chosen so that any constraint violation costs more than the whole
//! objective range, which makes the model's minimum a feasible optimum.

mod bpp;
mod mcp;
mod tsp;
mod vrp;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::problems::{ProblemInstance, ProblemKind};
use crate::qubo::{Fingerprint, QuboModel, Sample};

pub use bpp::{bpp_sample, decode_bpp, encode_bpp};
pub use mcp::{decode_mcp, encode_mcp, mcp_sample};
pub use tsp::{decode_tsp, encode_tsp, tsp_sample};
pub use vrp::{decode_vrp, encode_vrp, vrp_sample};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("slack encoding needs integral data: {0}")]
    NonIntegral(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("encoding is for {encoding:?}, instance is {instance:?}")]
    KindMismatch {
        encoding: ProblemKind,
        instance: ProblemKind,
    },
    #[error("sample has {actual} variables, encoding has {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Meaning of one QUBO variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarSlot {
    /// TSP node at tour position.
    TspVisit { node: usize, position: usize },
    /// VRP client node (1-based node index) on a route at a position.
    VrpVisit { client: usize, route: usize, position: usize },
    /// Capacity slack bit of a VRP route.
    VrpSlack { route: usize, bit: usize },
    /// BPP bin is open.
    BinUsed { bin: usize },
    /// BPP item placed in bin.
    ItemInBin { item: usize, bin: usize },
    /// Capacity slack bit of a BPP bin.
    BinSlack { bin: usize, bit: usize },
    /// MCP node side.
    CutSide { node: usize },
}

/// Ties a [`QuboModel`] back to the instance it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub kind: ProblemKind,
    slots: Vec<VarSlot>,
    index: BTreeMap<VarSlot, usize>,
    pub penalties: BTreeMap<String, f64>,
    pub instance_ref: Fingerprint,
    /// Feasible samples satisfy `energy = objective_scale * objective + objective_constant`.
    pub objective_scale: f64,
    pub objective_constant: f64,
}

impl Encoding {
    fn new(kind: ProblemKind, slots: Vec<VarSlot>, instance_ref: Fingerprint) -> Self {
        let index = slots.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Encoding {
            kind,
            slots,
            index,
            penalties: BTreeMap::new(),
            instance_ref,
            objective_scale: 1.0,
            objective_constant: 0.0,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, var: usize) -> VarSlot {
        self.slots[var]
    }

    pub fn slots(&self) -> &[VarSlot] {
        &self.slots
    }

    /// Variable index of `slot`.
    pub fn var(&self, slot: VarSlot) -> Option<usize> {
        self.index.get(&slot).copied()
    }

    /// Energy a feasible sample with native objective `objective` must have.
    pub fn expected_energy(&self, objective: f64) -> f64 {
        self.objective_scale * objective + self.objective_constant
    }

    fn check_sample(&self, sample: &Sample) -> Result<(), EncodeError> {
        if sample.len() != self.slots.len() {
            return Err(EncodeError::DimensionMismatch {
                expected: self.slots.len(),
                actual: sample.len(),
            });
        }
        Ok(())
    }

    fn check_kind(&self, kind: ProblemKind) -> Result<(), EncodeError> {
        if self.kind != kind {
            return Err(EncodeError::KindMismatch {
                encoding: self.kind,
                instance: kind,
            });
        }
        Ok(())
    }
}

/// Native solution recovered from a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NativeSolution {
    /// Node order of a closed tour.
    Tour(Vec<usize>),
    /// One client list per vehicle (client node indices, empty routes kept).
    Routes(Vec<Vec<usize>>),
    /// Bin index per item.
    Bins(Vec<usize>),
    /// Side (0/1) per node.
    Partition(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedSolution {
    pub feasible: bool,
    pub native: Option<NativeSolution>,
    /// Original objective (route length, bin count, cut weight); `None` when infeasible.
    pub objective: Option<f64>,
}

impl DecodedSolution {
    fn infeasible() -> Self {
        DecodedSolution {
            feasible: false,
            native: None,
            objective: None,
        }
    }

    fn feasible(native: NativeSolution, objective: f64) -> Self {
        DecodedSolution {
            feasible: true,
            native: Some(native),
            objective: Some(objective),
        }
    }
}

/// Encodes any supported instance.
pub fn encode(inst: &ProblemInstance) -> Result<(QuboModel, Encoding), EncodeError> {
    match inst {
        ProblemInstance::Tsp(i) => encode_tsp(i),
        ProblemInstance::Vrp(i) => encode_vrp(i),
        ProblemInstance::Bpp(i) => encode_bpp(i),
        ProblemInstance::Mcp(i) => encode_mcp(i),
    }
}

/// Decodes `sample` against the instance `enc` was built from.
pub fn decode(
    enc: &Encoding,
    sample: &Sample,
    inst: &ProblemInstance,
) -> Result<DecodedSolution, EncodeError> {
    match inst {
        ProblemInstance::Tsp(i) => decode_tsp(enc, sample, i),
        ProblemInstance::Vrp(i) => decode_vrp(enc, sample, i),
        ProblemInstance::Bpp(i) => decode_bpp(enc, sample, i),
        ProblemInstance::Mcp(i) => decode_mcp(enc, sample, i),
    }
}

/// Number of binary digits needed to represent every integer in `0..=max`.
fn slack_width(max: f64) -> usize {
    let mut width = 0;
    while ((1u64 << width) as f64) < max + 1.0 {
        width += 1;
    }
    width
}

fn require_integral(x: f64, what: &str) -> Result<(), EncodeError> {
    if x.fract() != 0.0 {
        return Err(EncodeError::NonIntegral(format!("{what} = {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_width_matches_log2() {
        // ceil(log2(c + 1))
        for (c, w) in [(1.0, 1), (2.0, 2), (3.0, 2), (7.0, 3), (8.0, 4), (10.0, 4), (100.0, 7)] {
            assert_eq!(slack_width(c), w, "capacity {c}");
        }
    }
}
