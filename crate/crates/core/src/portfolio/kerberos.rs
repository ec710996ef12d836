use std::time::Instant;

use rayon::prelude::*;

use super::{initial_sample, BranchKind, BranchSpec, PortfolioConfig, PortfolioError};
use crate::decomposer::{decomposition_round, DecomposerConfig};
use crate::heuristics::{anneal_read, tabu_search, SaConfig, TabuConfig};
use crate::qubo::{QuboModel, SampleRecord};
use crate::rng::derive_seed;

/// One bounded run of `branch` from `start`. Iteration 0 uses the branch seed
/// itself; later iterations derive fresh seeds from it. `window` selects the
/// impact block for the decomposed branch.
pub fn run_episode(
    model: &QuboModel,
    branch: &BranchSpec,
    start: &SampleRecord,
    iteration: usize,
    window: usize,
) -> Result<SampleRecord, PortfolioError> {
    let seed = match iteration {
        0 => branch.seed,
        k => derive_seed(branch.seed, k as u64),
    };
    Ok(match &branch.kind {
        BranchKind::Tabu(cfg) => tabu_search(model, &start.sample, &TabuConfig { seed, ..cfg.clone() })?,
        BranchKind::Sa { sweeps } => {
            let cfg = SaConfig::for_model(model).with_sweeps(*sweeps).with_reads(1).with_seed(seed);
            anneal_read(model, Some(&start.sample), &cfg, 0)?
        }
        BranchKind::QuantumDecomposed { backend, fraction } => {
            let cfg = DecomposerConfig {
                fraction: *fraction,
                backend: backend.clone(),
                seed,
                ..DecomposerConfig::default()
            };
            cfg.validate(model.num_variables())?;
            decomposition_round(model, start, &cfg, window, seed)?.unwrap_or_else(|| start.clone())
        }
    })
}

/// Cooperating branches sharing one incumbent.
///
/// Every iteration runs one episode of each branch concurrently from the
/// shared incumbent. At the barrier the best result (energy, then bit order)
/// becomes the incumbent for all branches. A failing branch is logged and
/// skipped for that iteration; the solve fails only if every branch fails.
/// The decomposed branch moves to the next impact block after an iteration
/// without improvement.
pub fn kerberos_solve(model: &QuboModel, cfg: &PortfolioConfig) -> Result<SampleRecord, PortfolioError> {
    cfg.validate()?;
    let n = model.num_variables();
    let mut incumbent = SampleRecord::new(model, initial_sample(n, cfg.seed))?;
    if n == 0 {
        return Ok(incumbent);
    }
    let started = Instant::now();
    let mut stall = 0;
    for iteration in 0..cfg.iterations {
        if iteration > 0 && cfg.time_limit.is_some_and(|limit| started.elapsed() >= limit) {
            break;
        }
        let results: Vec<Result<SampleRecord, PortfolioError>> = cfg
            .branches
            .par_iter()
            .map(|b| run_episode(model, b, &incumbent, iteration, stall))
            .collect();
        let mut best: Option<SampleRecord> = None;
        let mut last_error = None;
        for (branch, result) in cfg.branches.iter().zip(results) {
            match result {
                Ok(r) => {
                    if best.as_ref().is_none_or(|b| r.better_than(b)) {
                        best = Some(r);
                    }
                }
                Err(e) => {
                    log::warn!("kerberos: {} branch failed in iteration {iteration}: {e}", branch.label());
                    last_error = Some(e);
                }
            }
        }
        let Some(best) = best else {
            return Err(PortfolioError::AllBranchesFailed {
                iteration,
                last: last_error.map(|e| e.to_string()).unwrap_or_default(),
            });
        };
        stall = if best.energy < incumbent.energy { 0 } else { stall + 1 };
        log::debug!("kerberos: iteration {iteration} incumbent {}", best.energy);
        incumbent = best;
    }
    Ok(incumbent)
}


#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::backends::{exact_solve, BackendError, Capability, ExactBackend, Sampler, SharedSampler};
    use crate::corpus::random_model;
    use crate::qubo::SampleSet;

    struct Down;

    impl Sampler for Down {
        fn name(&self) -> &str {
            "down"
        }
        fn capability(&self) -> Capability {
            Capability {
                max_vars: None,
                exact: false,
            }
        }
        fn sample(&self, _: &QuboModel, _: usize, _: u64) -> Result<SampleSet, BackendError> {
            Err(BackendError::Transport {
                message: "connection refused".into(),
                retryable: true,
            })
        }
    }

    fn exact() -> SharedSampler {
        Arc::new(ExactBackend)
    }

    #[test]
    fn single_tabu_branch_is_plain_tabu() {
        let m = random_model(12, 14, 0.4);
        let cfg = PortfolioConfig {
            branches: vec![BranchSpec::tabu(77)],
            iterations: 1,
            ..PortfolioConfig::standard(exact(), 5)
        };
        let got = kerberos_solve(&m, &cfg).unwrap();
        let plain = tabu_search(
            &m,
            &initial_sample(14, 5),
            &TabuConfig::default().with_sweeps(super::super::TABU_EPISODE_SWEEPS).with_seed(77),
        )
        .unwrap();
        assert_eq!(got, plain);
    }

    #[test]
    fn never_worse_than_standalone_branches() {
        let mut optimal = 0;
        for seed in 0..200u64 {
            let n = 2 + (seed % 15) as usize;
            let m = random_model(20_000 + seed, n, 0.5);
            let cfg = PortfolioConfig::standard(exact(), seed);
            let joint = kerberos_solve(&m, &cfg).unwrap();
            for b in &cfg.branches {
                let alone = PortfolioConfig {
                    branches: vec![b.clone()],
                    ..cfg.clone()
                };
                let solo = kerberos_solve(&m, &alone).unwrap();
                assert!(joint.energy <= solo.energy + 1e-9, "seed {seed} branch {}", b.label());
            }
            if joint.energy <= exact_solve(&m).unwrap().energy + 1e-9 {
                optimal += 1;
            }
        }
        assert!(optimal >= 190, "{optimal}/200");
    }

    #[test]
    fn failing_branch_is_isolated() {
        let m = random_model(3, 12, 0.5);
        let cfg = PortfolioConfig::standard(exact(), 9);
        let mut with_down = cfg.clone();
        with_down.branches.push(BranchSpec::quantum(Arc::new(Down), 0.25, 1));
        assert_eq!(kerberos_solve(&m, &cfg).unwrap(), kerberos_solve(&m, &with_down).unwrap());

        let all_down = PortfolioConfig {
            branches: vec![BranchSpec::quantum(Arc::new(Down), 0.25, 1)],
            ..cfg
        };
        assert!(matches!(
            kerberos_solve(&m, &all_down),
            Err(PortfolioError::AllBranchesFailed { iteration: 0, .. })
        ));
    }

    #[test]
    fn incumbent_is_monotone_and_repeatable() {
        let m = random_model(44, 16, 0.6);
        let mut last = f64::INFINITY;
        for iterations in 1..=6 {
            let cfg = PortfolioConfig {
                iterations,
                ..PortfolioConfig::standard(exact(), 2)
            };
            let r = kerberos_solve(&m, &cfg).unwrap();
            assert!(r.energy <= last);
            assert_eq!(r, kerberos_solve(&m, &cfg).unwrap());
            last = r.energy;
        }
    }

    #[test]
    fn empty_branch_list_is_rejected() {
        let cfg = PortfolioConfig {
            branches: vec![],
            ..PortfolioConfig::standard(exact(), 0)
        };
        assert!(matches!(
            kerberos_solve(&QuboModel::empty(3), &cfg),
            Err(PortfolioError::InvalidConfig(_))
        ));
    }
}
