//! Parallel-branch hybrid workflows: Kerberos-style cooperating branches that
//! share an incumbent at iteration barriers, and an HSS-style pool of
//! explorer/exploiter threads. Also holds the solver taxonomy registry.

mod hss;
mod kerberos;
mod registry;

use std::time::Duration;

pub use hss::{hss_explorer_config, hss_solve, hss_solve_traced, HssReport};
pub use kerberos::{kerberos_solve, run_episode};
pub use registry::{registry_lookup, Classification, Role, SolverTag, UnknownSolver, REGISTRY};

use crate::backends::{BackendError, SharedSampler};
use crate::decomposer::DecomposeError;
use crate::heuristics::{HeuristicError, TabuConfig};
use crate::qubo::{QuboError, Sample};
use crate::rng::{derive_seed, random_sample, stream_rng};

/// Tabu sweeps per Kerberos episode.
pub const TABU_EPISODE_SWEEPS: usize = 100;
/// Annealing sweeps per Kerberos episode (and per HSS explorer run).
pub const SA_EPISODE_SWEEPS: usize = 200;
/// Default share of variables the quantum branch hands to its backend.
pub const DEFAULT_QUANTUM_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PortfolioError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("every branch failed in iteration {iteration}; last error: {last}")]
    AllBranchesFailed { iteration: usize, last: String },
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

#[derive(Clone)]
pub enum BranchKind {
    Tabu(TabuConfig),
    /// Annealing for `sweeps` sweeps with the model-scaled schedule.
    Sa { sweeps: usize },
    /// One decomposition round on `backend` per episode.
    QuantumDecomposed { backend: SharedSampler, fraction: f64 },
}

impl std::fmt::Debug for BranchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BranchKind::Tabu(cfg) => f.debug_tuple("Tabu").field(cfg).finish(),
            BranchKind::Sa { sweeps } => f.debug_struct("Sa").field("sweeps", sweeps).finish(),
            BranchKind::QuantumDecomposed { backend, fraction } => f
                .debug_struct("QuantumDecomposed")
                .field("backend", &backend.name())
                .field("fraction", fraction)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchSpec {
    pub kind: BranchKind,
    pub seed: u64,
}

impl BranchSpec {
    pub fn tabu(seed: u64) -> Self {
        BranchSpec {
            kind: BranchKind::Tabu(TabuConfig::default().with_sweeps(TABU_EPISODE_SWEEPS)),
            seed,
        }
    }

    pub fn sa(seed: u64) -> Self {
        BranchSpec {
            kind: BranchKind::Sa {
                sweeps: SA_EPISODE_SWEEPS,
            },
            seed,
        }
    }

    pub fn quantum(backend: SharedSampler, fraction: f64, seed: u64) -> Self {
        BranchSpec {
            kind: BranchKind::QuantumDecomposed { backend, fraction },
            seed,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            BranchKind::Tabu(_) => "tabu",
            BranchKind::Sa { .. } => "sa",
            BranchKind::QuantumDecomposed { .. } => "quantum",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PortfolioConfig {
    pub branches: Vec<BranchSpec>,
    pub iterations: usize,
    /// Thread-pool size for the HSS workflow.
    pub threads: usize,
    pub time_limit: Option<Duration>,
    /// Seeds the shared initial sample and the HSS threads.
    pub seed: u64,
}

impl PortfolioConfig {
    /// Tabu, annealing and a decomposed-quantum branch on `backend`, with
    /// branch seeds derived from `seed`.
    pub fn standard(backend: SharedSampler, seed: u64) -> Self {
        PortfolioConfig {
            branches: vec![
                BranchSpec::tabu(derive_seed(seed, 1)),
                BranchSpec::sa(derive_seed(seed, 2)),
                BranchSpec::quantum(backend, DEFAULT_QUANTUM_FRACTION, derive_seed(seed, 3)),
            ],
            iterations: 20,
            threads: 4,
            time_limit: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), PortfolioError> {
        if self.branches.is_empty() {
            return Err(PortfolioError::InvalidConfig("at least one branch is required".into()));
        }
        if self.iterations == 0 || self.threads == 0 {
            return Err(PortfolioError::InvalidConfig(
                "iterations and threads must be positive".into(),
            ));
        }
        for b in &self.branches {
            match &b.kind {
                BranchKind::Tabu(cfg) => cfg.validate()?,
                BranchKind::Sa { sweeps: 0 } => {
                    return Err(PortfolioError::InvalidConfig("sa branch needs sweeps > 0".into()))
                }
                BranchKind::QuantumDecomposed { fraction, .. } if !(*fraction > 0.0 && *fraction <= 1.0) => {
                    return Err(PortfolioError::InvalidConfig(format!(
                        "quantum branch fraction must lie in (0, 1], got {fraction}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The first decomposed-quantum branch, if any.
    pub fn quantum_branch(&self) -> Option<(&SharedSampler, f64)> {
        self.branches.iter().find_map(|b| match &b.kind {
            BranchKind::QuantumDecomposed { backend, fraction } => Some((backend, *fraction)),
            _ => None,
        })
    }
}

/// Starting assignment shared by the portfolio workflows.
pub fn initial_sample(n: usize, seed: u64) -> Sample {
    random_sample(n, &mut stream_rng(seed, 0))
}
