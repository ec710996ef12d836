use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// Workflow name plus the knobs the harness exposes. Unset knobs keep the
/// workflow's own defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub name: String,
    /// Backend spec: `exact`, `anneal` or `remote:<url>`.
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Decomposition rounds (qbsolv).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    /// Portfolio iterations (kerberos, hss).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_secs: Option<f64>,
    /// Branch-and-bound node budget (qhs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<u64>,
}

fn default_backend() -> String {
    "exact".into()
}

impl SolverConfig {
    pub fn named(name: impl Into<String>) -> Self {
        SolverConfig {
            name: name.into(),
            backend: default_backend(),
            fraction: None,
            rounds: None,
            iterations: None,
            threads: None,
            time_limit_secs: None,
            node_limit: None,
        }
    }

    pub fn time_limit(&self) -> Option<Duration> {
        self.time_limit_secs.map(Duration::from_secs_f64)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if let Some(f) = self.fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(HarnessError::Config(format!("fraction must lie in (0, 1], got {f}")));
            }
        }
        if let Some(t) = self.time_limit_secs {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(HarnessError::Config(format!("time limit must be a non-negative number of seconds, got {t}")));
            }
        }
        if self.rounds == Some(0) || self.iterations == Some(0) || self.threads == Some(0) || self.node_limit == Some(0) {
            return Err(HarnessError::Config("rounds, iterations, threads and node_limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instances: Vec<PathBuf>,
    pub solver: SolverConfig,
    #[serde(default = "default_repetitions")]
    pub repetitions: NonZeroUsize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
    /// Store per-run wall times. Off by default so reports are reproducible
    /// byte for byte.
    #[serde(default)]
    pub record_times: bool,
}

fn default_repetitions() -> NonZeroUsize {
    NonZeroUsize::new(10).unwrap()
}

impl RunConfig {
    pub fn new(instances: Vec<PathBuf>, solver: SolverConfig) -> Self {
        RunConfig {
            instances,
            solver,
            repetitions: default_repetitions(),
            base_seed: 0,
            format: OutputFormat::default(),
            record_times: false,
        }
    }

    pub fn with_repetitions(mut self, reps: usize) -> Result<Self, HarnessError> {
        self.repetitions = NonZeroUsize::new(reps).ok_or_else(|| HarnessError::Config("repetitions must be at least 1".into()))?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    /// Parses a JSON config. Relative instance paths are taken relative to
    /// `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        for p in &mut cfg.instances {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }
}
