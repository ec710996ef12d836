//! Sampler backends: the "quantum module" that hybrid workflows send
//! subproblems to. Local stand-ins (exact enumeration, simulated annealing)
//! and an HTTP client for a remote sampler all sit behind [`Sampler`].

mod exact;
mod remote;

use std::sync::Arc;

pub use exact::{exact_solve, ExactBackend, EXACT_MAX_VARS};
pub use remote::{remote_sample, RemoteBackend, RemoteSamplerConfig};

use crate::heuristics::{sa_sample, HeuristicError, SaConfig};
use crate::qubo::{QuboError, QuboModel, SampleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("model has {n} variables, backend accepts at most {max}")]
    Capacity { n: usize, max: usize },
    #[error("transport error (retryable: {retryable}): {message}")]
    Transport { message: String, retryable: bool },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport { retryable: true, .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capability {
    pub max_vars: Option<usize>,
    /// Results are certified global optima.
    pub exact: bool,
}

impl Capability {
    pub fn check(&self, n: usize) -> Result<(), BackendError> {
        match self.max_vars {
            Some(max) if n > max => Err(BackendError::Capacity { n, max }),
            _ => Ok(()),
        }
    }
}

/// A solver for whole QUBO models. Implementations must tolerate concurrent
/// calls, and every returned [`SampleSet`] carries locally verified energies.
pub trait Sampler: Send + Sync {
    fn name(&self) -> &str;
    fn capability(&self) -> Capability;
    fn sample(&self, model: &QuboModel, num_reads: usize, seed: u64) -> Result<SampleSet, BackendError>;
}

pub type SharedSampler = Arc<dyn Sampler>;

/// Simulated annealing as a backend. Without an explicit config, the
/// schedule is derived from each model via [`SaConfig::for_model`].
#[derive(Debug, Clone, Default)]
pub struct AnnealBackend {
    config: Option<SaConfig>,
}

impl AnnealBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(cfg: SaConfig) -> Self {
        AnnealBackend { config: Some(cfg) }
    }
}

/// Wraps [`sa_sample`] as a backend.
pub fn anneal_backend(cfg: Option<SaConfig>) -> AnnealBackend {
    AnnealBackend { config: cfg }
}

impl Sampler for AnnealBackend {
    fn name(&self) -> &str {
        "anneal"
    }

    fn capability(&self) -> Capability {
        Capability {
            max_vars: None,
            exact: false,
        }
    }

    fn sample(&self, model: &QuboModel, num_reads: usize, seed: u64) -> Result<SampleSet, BackendError> {
        let base = match &self.config {
            Some(cfg) => cfg.clone(),
            None => SaConfig::for_model(model),
        };
        let cfg = base.with_reads(num_reads.max(1)).with_seed(seed);
        Ok(sa_sample(model, &cfg)?)
    }
}

/// Parses a backend spec: `exact`, `anneal` or `remote:<url>`.
pub fn backend_from_spec(spec: &str) -> Result<SharedSampler, BackendError> {
    match spec {
        "exact" => Ok(Arc::new(ExactBackend)),
        "anneal" => Ok(Arc::new(AnnealBackend::new())),
        _ => match spec.strip_prefix("remote:") {
            Some(url) if !url.is_empty() => Ok(Arc::new(RemoteBackend::new(RemoteSamplerConfig::new(url))?)),
            _ => Err(BackendError::Config(format!("unknown backend {spec:?}"))),
        },
    }
}
