use std::path::Path;
use std::time::Instant;

use hyqubo::backends::{backend_from_spec, SharedSampler};
use hyqubo::encoders::{decode, encode};
use hyqubo::problems::{load_instance, ProblemInstance, ProblemKind};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::solver::{solve, Workflow};
use crate::{stats, HarnessError, RunConfig, SolverConfig};

/// One repetition on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Original objective; `None` if the final sample is infeasible.
    pub objective: Option<f64>,
    pub energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proven_optimal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

/// Per-instance summary. Statistics cover feasible runs only and are `None`
/// when there are none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub instance: String,
    pub kind: ProblemKind,
    pub runs: Vec<RunRecord>,
    pub feasible_count: usize,
    pub avg: Option<f64>,
    pub std: Option<f64>,
    pub median: Option<f64>,
    /// Lowest objective, or highest for max-cut.
    pub best: Option<f64>,
}

impl RunStats {
    pub fn from_runs(instance: impl Into<String>, kind: ProblemKind, runs: Vec<RunRecord>) -> Self {
        let objectives: Vec<f64> = runs.iter().filter_map(|r| r.objective).collect();
        let best = if kind == ProblemKind::Mcp {
            objectives.iter().copied().reduce(f64::max)
        } else {
            objectives.iter().copied().reduce(f64::min)
        };
        RunStats {
            instance: instance.into(),
            kind,
            feasible_count: objectives.len(),
            avg: stats::mean(&objectives),
            std: stats::population_std(&objectives),
            median: stats::median(&objectives),
            best,
            runs,
        }
    }

    /// Objectives of the feasible runs, in run order.
    pub fn objectives(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.objective).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceError {
    pub instance: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub stats: Vec<RunStats>,
    pub errors: Vec<InstanceError>,
}

/// Runs the configured workflow on every instance. An instance that fails to
/// load or solve becomes an [`InstanceError`] and the rest still run; an
/// unknown solver or backend fails the whole call up front.
pub fn run_benchmark(cfg: &RunConfig) -> Result<BenchReport, HarnessError> {
    let workflow = Workflow::from_name(&cfg.solver.name)?;
    cfg.solver.validate()?;
    let backend = backend_from_spec(&cfg.solver.backend)?;
    let outcomes: Vec<Result<RunStats, InstanceError>> = cfg
        .instances
        .par_iter()
        .map(|path| {
            load_instance(path)
                .map_err(HarnessError::from)
                .and_then(|inst| run_with(&inst, workflow, &backend, cfg))
                .map_err(|e| {
                    warn!("{}: {e}", path.display());
                    InstanceError {
                        instance: display_name(path),
                        message: e.to_string(),
                    }
                })
        })
        .collect();
    let mut report = BenchReport::default();
    for o in outcomes {
        match o {
            Ok(s) => report.stats.push(s),
            Err(e) => report.errors.push(e),
        }
    }
    Ok(report)
}

fn display_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// All repetitions of `cfg` on one already loaded instance.
pub fn run_instance(inst: &ProblemInstance, cfg: &RunConfig) -> Result<RunStats, HarnessError> {
    let workflow = Workflow::from_name(&cfg.solver.name)?;
    cfg.solver.validate()?;
    let backend = backend_from_spec(&cfg.solver.backend)?;
    run_with(inst, workflow, &backend, cfg)
}

fn run_with(
    inst: &ProblemInstance,
    workflow: Workflow,
    backend: &SharedSampler,
    cfg: &RunConfig,
) -> Result<RunStats, HarnessError> {
    let (model, enc) = encode(inst)?;
    let runs = (0..cfg.repetitions.get() as u64)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.base_seed.wrapping_add(r);
            let start = Instant::now();
            let out = solve(workflow, &cfg.solver, backend, &model, seed)?;
            let wall_ms = cfg.record_times.then(|| start.elapsed().as_secs_f64() * 1e3);
            let decoded = decode(&enc, &out.best.sample, inst)?;
            Ok(RunRecord {
                seed,
                objective: decoded.objective,
                energy: out.best.energy,
                gap: out.gap,
                proven_optimal: out.proven_optimal,
                wall_ms,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let s = RunStats::from_runs(inst.name(), inst.kind(), runs);
    info!(
        "{} [{}]: {}/{} feasible, avg {:?}",
        s.instance,
        workflow.name(),
        s.feasible_count,
        s.runs.len(),
        s.avg
    );
    Ok(s)
}

/// Convenience for a single in-memory instance and solver name.
pub fn quick_run(inst: &ProblemInstance, solver: &str, reps: usize, seed: u64) -> Result<RunStats, HarnessError> {
    let cfg = RunConfig::new(Vec::new(), SolverConfig::named(solver))
        .with_repetitions(reps)?
        .with_seed(seed);
    run_instance(inst, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyqubo::problems::McpInstance;

    fn record(objective: Option<f64>) -> RunRecord {
        RunRecord {
            seed: 0,
            objective,
            energy: 0.0,
            gap: None,
            proven_optimal: None,
            wall_ms: None,
        }
    }

    #[test]
    fn infeasible_runs_are_excluded() {
        let s = RunStats::from_runs(
            "x",
            ProblemKind::Tsp,
            vec![record(Some(3.0)), record(None), record(Some(5.0))],
        );
        assert_eq!(s.feasible_count, 2);
        assert_eq!(s.avg, Some(4.0));
        assert_eq!(s.std, Some(1.0));
        assert_eq!(s.median, Some(4.0));
        assert_eq!(s.best, Some(3.0));
        let none = RunStats::from_runs("y", ProblemKind::Bpp, vec![record(None)]);
        assert_eq!((none.feasible_count, none.avg, none.best), (0, None, None));
    }

    #[test]
    fn maxcut_best_is_largest() {
        let s = RunStats::from_runs("m", ProblemKind::Mcp, vec![record(Some(3.0)), record(Some(5.0))]);
        assert_eq!(s.best, Some(5.0));
    }

    #[test]
    fn triangle_with_qhs() {
        let tri = ProblemInstance::Mcp(McpInstance {
            name: "triangle".into(),
            n: 3,
            edges: vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)],
        });
        let s = quick_run(&tri, "qhs", 10, 0).unwrap();
        assert_eq!(s.runs.len(), 10);
        assert_eq!(s.feasible_count, 10);
        assert_eq!(s.avg, Some(2.0));
        assert_eq!(s.std, Some(0.0));
        assert_eq!(s.median, Some(2.0));
        assert!(s.runs.iter().all(|r| r.proven_optimal == Some(true) && r.gap == Some(0.0)));
        assert_eq!(s.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());

        let one = quick_run(&tri, "qhs", 1, 7).unwrap();
        assert_eq!(one.std, Some(0.0));
    }

    #[test]
    fn unknown_solver_fails_immediately() {
        let cfg = RunConfig::new(vec!["missing.json".into()], SolverConfig::named("nope"));
        assert!(matches!(run_benchmark(&cfg), Err(HarnessError::UnknownSolver(_))));
    }

    #[test]
    fn bad_instance_becomes_error_entry() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("tri.json");
        std::fs::write(&good, r#"{"kind":"mcp","n":3,"edges":[[0,1,1],[0,2,1],[1,2,1]]}"#).unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{not json").unwrap();
        let cfg = RunConfig::new(vec![bad, good, dir.path().join("absent.json")], SolverConfig::named("qhs"))
            .with_repetitions(2)
            .unwrap();
        let report = run_benchmark(&cfg).unwrap();
        assert_eq!(report.stats.len(), 1);
        assert_eq!(report.stats[0].instance, "tri");
        let names: Vec<&str> = report.errors.iter().map(|e| e.instance.as_str()).collect();
        assert_eq!(names, ["bad", "absent"]);
    }
}
