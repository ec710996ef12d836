use hyqubo::backends::SharedSampler;
use hyqubo::bnb::{branch_and_bound, BnbConfig};
use hyqubo::decomposer::{qbsolv_solve, DecomposerConfig};
use hyqubo::portfolio::{hss_solve, kerberos_solve, registry_lookup, BranchKind, BranchSpec, PortfolioConfig};
use hyqubo::{QuboModel, SampleRecord};
use serde::{Deserialize, Serialize};

use crate::{HarnessError, SolverConfig};

/// The runnable hybrid workflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Workflow {
    Qbsolv,
    Kerberos,
    Hss,
    Qhs,
}

impl Workflow {
    pub const ALL: [Workflow; 4] = [Workflow::Qbsolv, Workflow::Kerberos, Workflow::Hss, Workflow::Qhs];

    /// Resolves a registry name. Names absent from the registry are
    /// [`HarnessError::UnknownSolver`]; registered families without a
    /// workflow are [`HarnessError::NoWorkflow`].
    pub fn from_name(name: &str) -> Result<Self, HarnessError> {
        let tag = registry_lookup(name)?;
        Self::ALL
            .into_iter()
            .find(|w| w.name() == tag.name)
            .ok_or_else(|| HarnessError::NoWorkflow(name.to_string()))
    }

    pub fn name(self) -> &'static str {
        match self {
            Workflow::Qbsolv => "qbsolv",
            Workflow::Kerberos => "kerberos",
            Workflow::Hss => "hss",
            Workflow::Qhs => "qhs",
        }
    }
}

/// One solver run on an encoded model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub best: SampleRecord,
    /// Only branch and bound reports a gap.
    pub gap: Option<f64>,
    pub proven_optimal: Option<bool>,
}

fn set_quantum_fraction(branches: &mut [BranchSpec], fraction: f64) {
    for b in branches {
        if let BranchKind::QuantumDecomposed { fraction: f, .. } = &mut b.kind {
            *f = fraction;
        }
    }
}

pub fn solve(
    workflow: Workflow,
    cfg: &SolverConfig,
    backend: &SharedSampler,
    model: &QuboModel,
    seed: u64,
) -> Result<SolveOutcome, HarnessError> {
    let plain = |best| SolveOutcome {
        best,
        gap: None,
        proven_optimal: None,
    };
    match workflow {
        Workflow::Qbsolv => {
            let mut c = DecomposerConfig::default()
                .with_backend(backend.clone())
                .with_seed(seed);
            if let Some(f) = cfg.fraction {
                c = c.with_fraction(f);
            }
            if let Some(r) = cfg.rounds {
                c.max_rounds = r;
            }
            Ok(plain(qbsolv_solve(model, &c)?))
        }
        Workflow::Kerberos | Workflow::Hss => {
            let mut c = PortfolioConfig::standard(backend.clone(), seed);
            if let Some(f) = cfg.fraction {
                set_quantum_fraction(&mut c.branches, f);
            }
            if let Some(i) = cfg.iterations {
                c.iterations = i;
            }
            if let Some(t) = cfg.threads {
                c.threads = t;
            }
            c.time_limit = cfg.time_limit();
            let best = if workflow == Workflow::Kerberos {
                kerberos_solve(model, &c)?
            } else {
                hss_solve(model, &c)?
            };
            Ok(plain(best))
        }
        Workflow::Qhs => {
            let mut c = BnbConfig::standard(backend.clone(), seed);
            if let Some(f) = cfg.fraction {
                set_quantum_fraction(&mut c.primals, f);
            }
            if let Some(n) = cfg.node_limit {
                c.node_limit = n;
            }
            c.time_limit = cfg.time_limit();
            let r = branch_and_bound(model, &c)?;
            Ok(SolveOutcome {
                best: r.incumbent,
                gap: Some(r.gap),
                proven_optimal: Some(r.proven_optimal),
            })
        }
    }
}
