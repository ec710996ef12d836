//! Benchmark harness: runs a hybrid workflow repeatedly over problem
//! instances, decodes every result to its original objective and reports
//! average, population standard deviation and median per instance.

pub mod config;
pub mod emit;
pub mod micro;
pub mod run;
pub mod solver;
pub mod stats;

use hyqubo::backends::BackendError;
use hyqubo::bnb::BnbError;
use hyqubo::decomposer::DecomposeError;
use hyqubo::encoders::EncodeError;
use hyqubo::portfolio::{PortfolioError, UnknownSolver};
use hyqubo::problems::ProblemError;

pub use config::{OutputFormat, RunConfig, SolverConfig};
pub use emit::{emit_table, parse_json_report};
pub use micro::{gen_micro_instances, micro_instances, Manifest, ManifestEntry, MicroInstance};
pub use run::{run_benchmark, run_instance, BenchReport, InstanceError, RunRecord, RunStats};
pub use solver::Workflow;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    UnknownSolver(#[from] UnknownSolver),
    #[error("solver {0:?} has no runnable workflow")]
    NoWorkflow(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported report schema version {0}")]
    Schema(u32),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
    #[error(transparent)]
    Bnb(#[from] BnbError),
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
