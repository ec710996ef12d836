//! QUBO data model: sparse quadratic models, samples, energy evaluation and
//! energy-sorted sample sets.

mod json;
mod model;
mod sample;

pub use json::QuboDocument;
pub use model::{Fingerprint, QuboBuilder, QuboModel};
pub use sample::{best_of, Sample, SampleRecord, SampleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuboError {
    #[error("sample has {actual} variables, model has {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("variable index {index} out of range for a model over {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("sample value {value} at position {position} is not binary")]
    NonBinary { position: usize, value: u8 },
    #[error("sample sets come from different models")]
    FingerprintMismatch,
    #[error("malformed QUBO document: {0}")]
    Format(String),
}
