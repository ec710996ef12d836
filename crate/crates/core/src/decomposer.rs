//! Decomposition solver: tabu from a random start, then repeated rounds that
//! clamp all but the most energetic variables, solve the small sub-model on a
//! backend and merge the answer back when it helps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backends::{BackendError, ExactBackend, SharedSampler};
use crate::heuristics::{tabu_search, HeuristicError, TabuConfig};
use crate::qubo::{QuboBuilder, QuboError, QuboModel, Sample, SampleRecord};
use crate::rng::{derive_seed, random_sample, stream_rng};

/// Sweeps of the tabu refinement run after every successful merge.
pub const POST_MERGE_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecomposeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("subproblem of {size} variables exceeds backend capacity {max}")]
    Capacity { size: usize, max: usize },
    #[error("clamp subset is empty")]
    EmptySubset,
    #[error("clamp subset index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

/// `|delta_energy_flip(i)|` for every variable, most energetic first, ties by
/// index.
pub fn variable_impact(model: &QuboModel, sample: &Sample) -> Result<Vec<(usize, f64)>, QuboError> {
    model.check_len(sample.len())?;
    let bits = sample.bits();
    let mut impacts: Vec<(usize, f64)> = (0..model.num_variables())
        .map(|i| (i, model.flip_delta(bits, i).abs()))
        .collect();
    impacts.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(impacts)
}

/// The `window`-th block of `size` variables in impact order, wrapping
/// around; window 0 is the `size` most energetic variables.
pub fn impact_window(model: &QuboModel, sample: &Sample, size: usize, window: usize) -> Result<Vec<usize>, QuboError> {
    let n = model.num_variables();
    let impacts = variable_impact(model, sample)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let size = size.min(n);
    let start = (window * size) % n;
    Ok((0..size).map(|k| impacts[(start + k) % n].0).collect())
}

/// Sub-model over `subset` with every other variable fixed to its value in
/// `sample`. Returns the sub-model and the map from sub-variable to original
/// index (ascending). For any sub-assignment `s`, the sub-model energy of `s`
/// equals the full energy of `sample` overwritten by `s` on `subset`.
pub fn clamp(model: &QuboModel, sample: &Sample, subset: &[usize]) -> Result<(QuboModel, Vec<usize>), DecomposeError> {
    let n = model.num_variables();
    model.check_len(sample.len())?;
    if subset.is_empty() {
        return Err(DecomposeError::EmptySubset);
    }
    let mut remap = subset.to_vec();
    remap.sort_unstable();
    remap.dedup();
    if let Some(&index) = remap.iter().find(|&&i| i >= n) {
        return Err(DecomposeError::IndexOutOfRange { index, n });
    }
    let mut local = vec![usize::MAX; n];
    for (k, &i) in remap.iter().enumerate() {
        local[i] = k;
    }
    let x = |i: usize| sample.get(i) as f64;
    let mut b = QuboBuilder::new(remap.len());
    b.add_offset(model.offset());
    for (&i, &c) in model.linear_terms() {
        match local[i] {
            usize::MAX => b.add_offset(c * x(i)),
            k => b.add_linear(k, c),
        };
    }
    for (&(i, j), &c) in model.quadratic_terms() {
        match (local[i], local[j]) {
            (usize::MAX, usize::MAX) => b.add_offset(c * x(i) * x(j)),
            (usize::MAX, kj) => b.add_linear(kj, c * x(i)),
            (ki, usize::MAX) => b.add_linear(ki, c * x(j)),
            (ki, kj) => b.add_quadratic(ki, kj, c),
        };
    }
    Ok((b.build(), remap))
}

/// `sample` with the sub-assignment `sub` written onto the variables in
/// `remap`.
pub fn overwrite(sample: &Sample, remap: &[usize], sub: &Sample) -> Sample {
    let mut out = sample.clone();
    for (k, &i) in remap.iter().enumerate() {
        out.set(i, sub.get(k) == 1);
    }
    out
}

#[derive(Clone, Serialize, Deserialize)]
pub struct DecomposerConfig {
    /// Share of variables sent to the backend per round.
    pub fraction: f64,
    pub max_rounds: usize,
    /// Stop after this many consecutive rounds without improvement.
    pub stall_rounds: usize,
    #[serde(skip, default = "default_backend")]
    pub backend: SharedSampler,
    /// Reads requested from the backend per subproblem.
    pub num_reads: usize,
    pub tabu: TabuConfig,
    pub seed: u64,
}

fn default_backend() -> SharedSampler {
    Arc::new(ExactBackend)
}

impl std::fmt::Debug for DecomposerConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecomposerConfig")
            .field("fraction", &self.fraction)
            .field("max_rounds", &self.max_rounds)
            .field("stall_rounds", &self.stall_rounds)
            .field("backend", &self.backend.name())
            .field("num_reads", &self.num_reads)
            .field("tabu", &self.tabu)
            .field("seed", &self.seed)
            .finish()
    }
}

impl Default for DecomposerConfig {
    fn default() -> Self {
        DecomposerConfig {
            fraction: 0.10,
            max_rounds: 100,
            stall_rounds: 10,
            backend: default_backend(),
            num_reads: 10,
            tabu: TabuConfig::default(),
            seed: 0,
        }
    }
}

impl DecomposerConfig {
    pub fn with_backend(mut self, backend: SharedSampler) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_fraction(mut self, fraction: f64) -> Self {
        self.fraction = fraction;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Subproblem size on an `n`-variable model.
    pub fn subproblem_size(&self, n: usize) -> usize {
        ((self.fraction * n as f64).ceil() as usize).clamp(1, n.max(1))
    }

    /// Checks the configuration and the backend's capacity for `n` variables.
    pub fn validate(&self, n: usize) -> Result<(), DecomposeError> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(DecomposeError::InvalidConfig(format!(
                "fraction must lie in (0, 1], got {}",
                self.fraction
            )));
        }
        if self.max_rounds == 0 || self.stall_rounds == 0 {
            return Err(DecomposeError::InvalidConfig(
                "max_rounds and stall_rounds must be positive".into(),
            ));
        }
        self.tabu.validate()?;
        let size = self.subproblem_size(n);
        if let Some(max) = self.backend.capability().max_vars {
            if size > max {
                return Err(DecomposeError::Capacity { size, max });
            }
        }
        Ok(())
    }
}

/// Sends the sub-model over `subset` to `backend` and merges its best answer
/// into `incumbent` if that strictly lowers the full energy. Returns the
/// merged record, or `None` when nothing improved.
pub fn improve_subset(
    model: &QuboModel,
    incumbent: &SampleRecord,
    subset: &[usize],
    backend: &SharedSampler,
    num_reads: usize,
    seed: u64,
) -> Result<Option<SampleRecord>, DecomposeError> {
    let (sub, remap) = clamp(model, &incumbent.sample, subset)?;
    let set = backend.sample(&sub, num_reads, seed)?;
    let Some(best) = set.best() else {
        return Ok(None);
    };
    let merged = SampleRecord::new(model, overwrite(&incumbent.sample, &remap, &best.sample))?;
    debug_assert!(
        (merged.energy - best.energy).abs() <= 1e-9 * (1.0 + merged.energy.abs()),
        "clamp identity violated: full {} vs sub {}",
        merged.energy,
        best.energy
    );
    Ok((merged.energy < incumbent.energy).then_some(merged))
}

/// One decomposition round: the `window`-th block of `size` variables in
/// impact order (wrapping around) goes to the backend; a successful merge
/// is refined by a short tabu run.
pub fn decomposition_round(
    model: &QuboModel,
    incumbent: &SampleRecord,
    cfg: &DecomposerConfig,
    window: usize,
    seed: u64,
) -> Result<Option<SampleRecord>, DecomposeError> {
    let size = cfg.subproblem_size(model.num_variables());
    let subset = impact_window(model, &incumbent.sample, size, window)?;
    let Some(merged) = improve_subset(model, incumbent, &subset, &cfg.backend, cfg.num_reads, seed)? else {
        return Ok(None);
    };
    let refine = TabuConfig {
        max_sweeps: POST_MERGE_SWEEPS,
        seed: derive_seed(seed, 1),
        ..cfg.tabu.clone()
    };
    Ok(Some(tabu_search(model, &merged.sample, &refine)?))
}

/// Tabu start plus improvement rounds; returns the best sample seen.
///
/// Each round targets the most energetic variables. After a round that does
/// not improve, the next round moves on to the following block in impact
/// order, so a stalled search still visits every variable before giving up.
pub fn qbsolv_solve(model: &QuboModel, cfg: &DecomposerConfig) -> Result<SampleRecord, DecomposeError> {
    let n = model.num_variables();
    if n == 0 {
        return Err(DecomposeError::InvalidConfig("model has no variables".into()));
    }
    cfg.validate(n)?;
    let init = random_sample(n, &mut stream_rng(cfg.seed, 0));
    let tabu_cfg = TabuConfig {
        seed: cfg.seed,
        ..cfg.tabu.clone()
    };
    let mut best = tabu_search(model, &init, &tabu_cfg)?;
    log::debug!("qbsolv: tabu start energy {}", best.energy);
    let mut stall = 0;
    let mut window = 0;
    for round in 0..cfg.max_rounds {
        let round_seed = derive_seed(cfg.seed, round as u64 + 1);
        match decomposition_round(model, &best, cfg, window, round_seed)? {
            Some(better) if better.energy < best.energy => {
                log::debug!("qbsolv: round {round} energy {}", better.energy);
                best = better;
                stall = 0;
                window = 0;
            }
            _ => {
                stall += 1;
                window += 1;
                if stall >= cfg.stall_rounds {
                    break;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::exact_solve;
    use crate::corpus::random_model;
    use crate::testutil::exhaustive_minimum;

    fn small() -> QuboModel {
        let mut b = QuboBuilder::new(2);
        b.add_linear(0, 1.0).add_linear(1, -2.0).add_quadratic(0, 1, 3.0);
        b.build()
    }

    #[test]
    fn impact_examples() {
        let mut b = QuboBuilder::new(3);
        b.add_linear(0, -1.0).add_linear(1, 3.0).add_linear(2, 1.0);
        let sep = b.build();
        assert_eq!(
            variable_impact(&sep, &Sample::zeros(3)).unwrap(),
            vec![(1, 3.0), (0, 1.0), (2, 1.0)]
        );
        let s = Sample::new(vec![0, 1]).unwrap();
        assert_eq!(variable_impact(&small(), &s).unwrap(), vec![(0, 4.0), (1, 2.0)]);
    }

    #[test]
    fn impact_is_local() {
        let m = random_model(4, 12, 0.3);
        let s = random_sample(12, &mut stream_rng(1, 1));
        let before: Vec<f64> = {
            let mut v = variable_impact(&m, &s).unwrap();
            v.sort_by_key(|p| p.0);
            v.into_iter().map(|p| p.1).collect()
        };
        let i = 5;
        let after: Vec<f64> = {
            let mut v = variable_impact(&m, &s.flipped(i)).unwrap();
            v.sort_by_key(|p| p.0);
            v.into_iter().map(|p| p.1).collect()
        };
        let near: Vec<usize> = m.neighbors(i).iter().map(|&(j, _)| j).collect();
        for k in 0..12 {
            if k != i && !near.contains(&k) {
                assert_eq!(before[k], after[k]);
            }
        }
    }

    #[test]
    fn clamp_hand_example() {
        let s = Sample::new(vec![0, 1]).unwrap();
        let (sub, remap) = clamp(&small(), &s, &[0]).unwrap();
        assert_eq!(remap, vec![0]);
        assert_eq!(sub.linear(0), 4.0);
        assert_eq!(sub.offset(), -2.0);
        assert_eq!(sub.energy_of(&[0]), small().energy_of(&[0, 1]));
        assert_eq!(sub.energy_of(&[1]), small().energy_of(&[1, 1]));
    }

    #[test]
    fn clamp_of_everything_is_identity() {
        let m = random_model(8, 9, 0.5);
        let s = random_sample(9, &mut stream_rng(2, 0));
        let all: Vec<usize> = (0..9).rev().collect();
        let (sub, remap) = clamp(&m, &s, &all).unwrap();
        assert_eq!(remap, (0..9).collect::<Vec<_>>());
        assert_eq!(sub, m);
    }

    #[test]
    fn clamp_errors() {
        let m = small();
        assert_eq!(clamp(&m, &Sample::zeros(2), &[]).unwrap_err(), DecomposeError::EmptySubset);
        assert!(matches!(
            clamp(&m, &Sample::zeros(2), &[2]),
            Err(DecomposeError::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn capacity_checked_before_rounds() {
        let m = QuboModel::empty(40);
        let cfg = DecomposerConfig::default().with_fraction(1.0);
        assert_eq!(
            qbsolv_solve(&m, &cfg).unwrap_err(),
            DecomposeError::Capacity { size: 40, max: 24 }
        );
        let bad = DecomposerConfig::default().with_fraction(0.0);
        assert!(matches!(qbsolv_solve(&m, &bad), Err(DecomposeError::InvalidConfig(_))));
    }

    #[test]
    fn full_fraction_with_exact_backend_is_optimal() {
        for seed in 0..40u64 {
            let m = random_model(300 + seed, 4 + (seed % 17) as usize, 0.4);
            let cfg = DecomposerConfig::default().with_fraction(1.0).with_seed(seed);
            let r = qbsolv_solve(&m, &cfg).unwrap();
            assert_eq!(r.energy, exact_solve(&m).unwrap().energy);
        }
    }

    #[test]
    fn separable_model_solved_in_first_round() {
        let mut b = QuboBuilder::new(30);
        for i in 0..30 {
            b.add_linear(i, if i % 3 == 0 { -1.0 } else { 2.0 });
        }
        let m = b.build();
        let cfg = DecomposerConfig {
            max_rounds: 1,
            ..DecomposerConfig::default().with_fraction(0.5)
        };
        assert_eq!(qbsolv_solve(&m, &cfg).unwrap().energy, -10.0);
    }

    #[test]
    fn beats_tabu_and_usually_finds_optimum() {
        let mut hits = 0;
        for seed in 0..200u64 {
            let n = 4 + (seed % 17) as usize;
            let m = random_model(7000 + seed, n, 0.4);
            let cfg = DecomposerConfig::default().with_fraction(0.15).with_seed(seed);
            let r = qbsolv_solve(&m, &cfg).unwrap();
            let init = random_sample(n, &mut stream_rng(seed, 0));
            let plain = tabu_search(&m, &init, &TabuConfig::default().with_seed(seed)).unwrap();
            assert!(r.energy <= plain.energy);
            let opt = if n <= 14 { exhaustive_minimum(&m).1 } else { exact_solve(&m).unwrap().energy };
            if r.energy <= opt + 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 180, "{hits}/200");
    }
}
