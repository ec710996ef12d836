use rayon::prelude::*;

use super::{BranchKind, PortfolioConfig, PortfolioError, SA_EPISODE_SWEEPS};
use crate::backends::SharedSampler;
use crate::decomposer::{impact_window, improve_subset};
use crate::heuristics::{Annealer, SaConfig};
use crate::qubo::{QuboModel, SampleRecord};
use crate::rng::{derive_seed, random_sample, stream_rng};

/// Outcome of an HSS run: the best record of the pool and each thread's
/// incumbent energy after every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct HssReport {
    pub best: SampleRecord,
    pub thread_logs: Vec<Vec<f64>>,
}

/// Explorer schedule: the model-scaled annealing schedule over the sweeps of
/// the configured annealing branch ([`SA_EPISODE_SWEEPS`] if none).
pub fn hss_explorer_config(model: &QuboModel, cfg: &PortfolioConfig) -> SaConfig {
    let sweeps = cfg
        .branches
        .iter()
        .find_map(|b| match b.kind {
            BranchKind::Sa { sweeps } => Some(sweeps),
            _ => None,
        })
        .unwrap_or(SA_EPISODE_SWEEPS);
    SaConfig::for_model(model).with_sweeps(sweeps).with_reads(1).with_seed(cfg.seed)
}

/// Pool of `cfg.threads` threads, each alternating a classical explorer with
/// a quantum exploiter. Returns the best answer of the pool.
pub fn hss_solve(model: &QuboModel, cfg: &PortfolioConfig) -> Result<SampleRecord, PortfolioError> {
    Ok(hss_solve_traced(model, cfg)?.best)
}

/// As [`hss_solve`], also returning per-thread incumbent logs.
///
/// Each iteration of thread `t` reheats an annealing walk from the thread
/// incumbent, drawing from stream `iteration * threads + t`. After every
/// sweep the exploiter clamps the walk's best state to its most energetic
/// variables, asks the backend of the first decomposed-quantum branch, and
/// moves the walk to the merged state when that is strictly better. Without
/// such a branch the exploiter is off.
pub fn hss_solve_traced(model: &QuboModel, cfg: &PortfolioConfig) -> Result<HssReport, PortfolioError> {
    if cfg.threads == 0 || cfg.iterations == 0 {
        return Err(PortfolioError::InvalidConfig(
            "iterations and threads must be positive".into(),
        ));
    }
    let explorer = hss_explorer_config(model, cfg);
    explorer.validate()?;
    let schedule = explorer.schedule();
    let exploiter = cfg.quantum_branch().map(|(backend, fraction)| {
        let size = ((fraction * model.num_variables() as f64).ceil() as usize).max(1);
        (backend.clone(), size)
    });
    if let Some((backend, size)) = &exploiter {
        if let Some(max) = backend.capability().max_vars {
            if *size > max {
                return Err(PortfolioError::InvalidConfig(format!(
                    "exploiter subproblem of {size} variables exceeds backend capacity {max}"
                )));
            }
        }
    }

    let pool: Vec<(SampleRecord, Vec<f64>)> = (0..cfg.threads)
        .into_par_iter()
        .map(|t| run_thread(model, cfg, t, &schedule, exploiter.as_ref()))
        .collect::<Result<_, _>>()?;

    let mut best: Option<SampleRecord> = None;
    let mut thread_logs = Vec::with_capacity(pool.len());
    for (record, log) in pool {
        if best.as_ref().is_none_or(|b| record.better_than(b)) {
            best = Some(record);
        }
        thread_logs.push(log);
    }
    Ok(HssReport {
        best: best.expect("at least one thread"),
        thread_logs,
    })
}

fn run_thread(
    model: &QuboModel,
    cfg: &PortfolioConfig,
    t: usize,
    schedule: &[f64],
    exploiter: Option<&(SharedSampler, usize)>,
) -> Result<(SampleRecord, Vec<f64>), PortfolioError> {
    let n = model.num_variables();
    let mut incumbent: Option<SampleRecord> = None;
    let mut log = Vec::with_capacity(cfg.iterations);
    let mut exploiter_up = exploiter.is_some();
    for iteration in 0..cfg.iterations {
        let stream = (iteration * cfg.threads + t) as u64;
        let mut rng = stream_rng(cfg.seed, stream);
        let start = match &incumbent {
            Some(r) => r.sample.clone(),
            None => random_sample(n, &mut rng),
        };
        let mut walk = Annealer::new(model, &start);
        let mut window = 0;
        for (sweep, &temp) in schedule.iter().enumerate() {
            walk.sweep(temp, &mut rng);
            let Some((backend, size)) = exploiter.filter(|_| exploiter_up) else {
                continue;
            };
            let current = walk.best_record();
            let subset = impact_window(model, &current.sample, *size, window)?;
            let seed = derive_seed(derive_seed(cfg.seed, stream), sweep as u64);
            match improve_subset(model, &current, &subset, backend, 1, seed) {
                Ok(Some(merged)) => {
                    walk.jump_to(&merged.sample);
                    window = 0;
                }
                Ok(None) => window += 1,
                Err(e) => {
                    log::warn!("hss: thread {t} exploiter disabled: {e}");
                    exploiter_up = false;
                }
            }
        }
        let found = walk.best_record();
        if incumbent.as_ref().is_none_or(|r| found.better_than(r)) {
            incumbent = Some(found);
        }
        log.push(incumbent.as_ref().map(|r| r.energy).expect("set above"));
    }
    Ok((incumbent.expect("iterations > 0"), log))
}
