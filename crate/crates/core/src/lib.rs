//! Hybrid QUBO solving: a sparse QUBO model, problem encoders, classical
//! heuristics, pluggable sampler backends and the hybrid workflows built on
//! them (decomposition, parallel portfolios, branch-and-bound).

pub mod backends;
pub mod bnb;
pub mod corpus;
pub mod decomposer;
pub mod encoders;
pub mod heuristics;
pub mod portfolio;
pub mod problems;
pub mod qubo;
pub mod rng;

#[cfg(test)]
mod testutil;

pub use qubo::{QuboBuilder, QuboError, QuboModel, Sample, SampleRecord, SampleSet};
