//! Classical single-flip search engines.

mod anneal;
mod tabu;

pub use anneal::{anneal_read, sa_sample, Annealer, SaConfig};
pub use tabu::{tabu_search, tabu_search_traced, TabuConfig};

use crate::qubo::QuboError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeuristicError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}
