use rand::Rng;
use serde::{Deserialize, Serialize};

use super::HeuristicError;
use crate::qubo::{QuboModel, Sample, SampleRecord};
use crate::rng::stream_rng;

/// Single-flip tabu search parameters.
///
/// The tabu attribute is the variable index: a flipped variable may not be
/// flipped again for `tenure` sweeps unless the move beats the best energy
/// seen so far (when `aspiration` is on). `tenure` is clamped below `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TabuConfig {
    pub tenure: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    pub aspiration: bool,
}

impl Default for TabuConfig {
    fn default() -> Self {
        TabuConfig {
            tenure: 20,
            max_sweeps: 500,
            seed: 0,
            aspiration: true,
        }
    }
}

impl TabuConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn validate(&self) -> Result<(), HeuristicError> {
        if self.max_sweeps == 0 {
            return Err(HeuristicError::InvalidConfig("tabu max_sweeps must be positive".into()));
        }
        Ok(())
    }

    /// Tenure actually used on a model with `n` variables.
    pub fn effective_tenure(&self, n: usize) -> usize {
        self.tenure.min(n.saturating_sub(1))
    }
}

/// Tabu search from `init`. Each sweep scores all `n` single flips and makes
/// the best admissible one (ties broken by the seeded generator), even if it
/// worsens the energy. Returns the best sample visited.
pub fn tabu_search(model: &QuboModel, init: &Sample, cfg: &TabuConfig) -> Result<SampleRecord, HeuristicError> {
    tabu_search_traced(model, init, cfg, |_, _| {})
}

/// As [`tabu_search`], calling `trace(sweep, best_energy)` after every sweep.
pub fn tabu_search_traced(
    model: &QuboModel,
    init: &Sample,
    cfg: &TabuConfig,
    mut trace: impl FnMut(usize, f64),
) -> Result<SampleRecord, HeuristicError> {
    cfg.validate()?;
    let n = model.num_variables();
    let start = SampleRecord::new(model, init.clone())?;
    if n == 0 {
        return Ok(start);
    }
    let tenure = cfg.effective_tenure(n);
    let mut rng = stream_rng(cfg.seed, 0);

    let mut bits = init.bits().to_vec();
    let mut field = model.local_fields(&bits);
    let mut current = start.energy;
    let mut best_energy = current;
    let mut best_bits = bits.clone();
    let mut tabu_until = vec![0usize; n];

    for sweep in 0..cfg.max_sweeps {
        let mut chosen: Option<(usize, f64)> = None;
        let mut ties = 0u32;
        for i in 0..n {
            let delta = if bits[i] == 0 { field[i] } else { -field[i] };
            let admissible =
                tabu_until[i] <= sweep || (cfg.aspiration && current + delta < best_energy);
            if !admissible {
                continue;
            }
            match chosen {
                Some((_, d)) if delta > d => {}
                Some((_, d)) if delta == d => {
                    ties += 1;
                    if rng.random_range(0..=ties) == 0 {
                        chosen = Some((i, delta));
                    }
                }
                _ => {
                    chosen = Some((i, delta));
                    ties = 0;
                }
            }
        }
        let Some((i, delta)) = chosen else {
            // every move tabu and none aspirates; tenure < n makes this unreachable
            break;
        };
        bits[i] ^= 1;
        let sign = if bits[i] == 1 { 1.0 } else { -1.0 };
        for &(j, q) in model.neighbors(i) {
            field[j] += sign * q;
        }
        current += delta;
        tabu_until[i] = sweep + 1 + tenure;
        if current < best_energy {
            best_energy = current;
            best_bits.copy_from_slice(&bits);
        }
        trace(sweep, best_energy);
    }

    let best = SampleRecord::new(model, Sample::new(best_bits)?)?;
    Ok(if best.energy <= start.energy { best } else { start })
}
