use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HeuristicError;
use crate::qubo::{QuboModel, Sample, SampleRecord, SampleSet};
use crate::rng::{random_sample, stream_rng, SolverRng};

/// Simulated annealing parameters: a geometric temperature schedule from
/// `t_initial` down to `t_final` over `sweeps` full passes, repeated for
/// `num_reads` independent reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub t_initial: f64,
    pub t_final: f64,
    pub sweeps: usize,
    pub num_reads: usize,
    pub seed: u64,
}

impl SaConfig {
    pub const DEFAULT_T_FINAL: f64 = 1e-3;

    /// Defaults scaled to `model`: the initial temperature is the largest total
    /// coefficient magnitude incident to one variable, so early sweeps accept
    /// almost every flip.
    pub fn for_model(model: &QuboModel) -> Self {
        let t_final = Self::DEFAULT_T_FINAL;
        let t_initial = model.max_incident_magnitude().max(10.0 * t_final);
        SaConfig {
            t_initial,
            t_final,
            sweeps: 1000,
            num_reads: 10,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn with_reads(mut self, num_reads: usize) -> Self {
        self.num_reads = num_reads;
        self
    }

    pub fn validate(&self) -> Result<(), HeuristicError> {
        if !(self.t_final > 0.0) || !(self.t_initial > self.t_final) || !self.t_initial.is_finite() {
            return Err(HeuristicError::InvalidConfig(format!(
                "temperatures must satisfy 0 < t_final < t_initial, got {} and {}",
                self.t_final, self.t_initial
            )));
        }
        if self.sweeps == 0 || self.num_reads == 0 {
            return Err(HeuristicError::InvalidConfig(
                "sweeps and num_reads must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Temperature of every sweep.
    pub fn schedule(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.t_initial];
        }
        let ratio = (self.t_final / self.t_initial).ln() / (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|k| self.t_initial * (ratio * k as f64).exp())
            .collect()
    }
}

/// `num_reads` independent annealing runs from random starts. Read `r` uses
/// stream `r` of `cfg.seed`, so the result does not depend on scheduling.
pub fn sa_sample(model: &QuboModel, cfg: &SaConfig) -> Result<SampleSet, HeuristicError> {
    cfg.validate()?;
    let schedule = cfg.schedule();
    let records: Vec<SampleRecord> = (0..cfg.num_reads as u64)
        .into_par_iter()
        .map(|read| {
            let mut rng = stream_rng(cfg.seed, read);
            anneal_with(model, None, &schedule, &mut rng, |_| {})
        })
        .collect();
    Ok(SampleSet::from_records(model, records)?)
}

/// One annealing read on stream `stream` of `cfg.seed`, starting from `init`
/// (or a random assignment drawn from the same stream). Returns the best
/// sample visited.
pub fn anneal_read(
    model: &QuboModel,
    init: Option<&Sample>,
    cfg: &SaConfig,
    stream: u64,
) -> Result<SampleRecord, HeuristicError> {
    cfg.validate()?;
    if let Some(s) = init {
        model.check_len(s.len())?;
    }
    let mut rng = stream_rng(cfg.seed, stream);
    Ok(anneal_with(model, init, &cfg.schedule(), &mut rng, |_| {}))
}

/// One proposed flip, reported to the observer of [`anneal_with`].
#[derive(Debug, Clone, Copy)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct FlipEvent {
    pub temperature: f64,
    pub delta: f64,
    pub accepted: bool,
}

/// Metropolis acceptance of an energy change at temperature `t`.
pub(crate) fn metropolis_accept(delta: f64, t: f64, rng: &mut SolverRng) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp()
}

pub(crate) fn anneal_with(
    model: &QuboModel,
    init: Option<&Sample>,
    schedule: &[f64],
    rng: &mut SolverRng,
    mut observe: impl FnMut(FlipEvent),
) -> SampleRecord {
    let start = match init {
        Some(s) => s.clone(),
        None => random_sample(model.num_variables(), rng),
    };
    let mut state = Annealer::new(model, &start);
    for &t in schedule {
        state.sweep_observed(t, rng, &mut observe);
    }
    state.best_record()
}

/// Annealing state that can be advanced one sweep at a time, tracking the
/// best assignment visited.
pub struct Annealer<'m> {
    model: &'m QuboModel,
    bits: Vec<u8>,
    field: Vec<f64>,
    current: f64,
    best_bits: Vec<u8>,
    best_energy: f64,
}

impl<'m> Annealer<'m> {
    pub fn new(model: &'m QuboModel, start: &Sample) -> Self {
        let bits = start.bits().to_vec();
        let field = model.local_fields(&bits);
        let current = model.energy_of(&bits);
        Annealer {
            model,
            best_bits: bits.clone(),
            bits,
            field,
            best_energy: current,
            current,
        }
    }

    /// One Metropolis pass over all variables at temperature `t`.
    pub fn sweep(&mut self, t: f64, rng: &mut SolverRng) {
        self.sweep_observed(t, rng, &mut |_| {});
    }

    fn sweep_observed(&mut self, t: f64, rng: &mut SolverRng, observe: &mut impl FnMut(FlipEvent)) {
        for i in 0..self.bits.len() {
            let delta = if self.bits[i] == 0 { self.field[i] } else { -self.field[i] };
            let accepted = metropolis_accept(delta, t, rng);
            observe(FlipEvent {
                temperature: t,
                delta,
                accepted,
            });
            if !accepted {
                continue;
            }
            self.bits[i] ^= 1;
            let sign = if self.bits[i] == 1 { 1.0 } else { -1.0 };
            for &(j, q) in self.model.neighbors(i) {
                self.field[j] += sign * q;
            }
            self.current += delta;
            if self.current < self.best_energy {
                self.best_energy = self.current;
                self.best_bits.copy_from_slice(&self.bits);
            }
        }
    }

    /// Moves the walk to `sample`, which also becomes the best state if it
    /// beats it.
    pub fn jump_to(&mut self, sample: &Sample) {
        self.bits.copy_from_slice(sample.bits());
        self.field = self.model.local_fields(&self.bits);
        self.current = self.model.energy_of(&self.bits);
        if self.current < self.best_energy {
            self.best_energy = self.current;
            self.best_bits.copy_from_slice(&self.bits);
        }
    }

    pub fn best_energy(&self) -> f64 {
        self.best_energy
    }

    /// Best state visited, with its energy evaluated afresh.
    pub fn best_record(&self) -> SampleRecord {
        let sample = Sample::new(self.best_bits.clone()).expect("bits stay binary");
        SampleRecord::new(self.model, sample).expect("length matches model")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::random_model;
    use crate::qubo::QuboBuilder;
    use crate::testutil::exhaustive_minimum;

    #[test]
    fn empty_terms_give_offset() {
        let mut b = QuboBuilder::new(4);
        b.add_offset(-1.25);
        let m = b.build();
        let cfg = SaConfig::for_model(&m).with_sweeps(10);
        let set = sa_sample(&m, &cfg).unwrap();
        assert!(set.records().iter().all(|r| r.energy == -1.25));
        assert_eq!(set.total_occurrences(), 10);
    }

    #[test]
    fn same_seed_same_set() {
        let m = random_model(3, 10, 0.5);
        let cfg = SaConfig::for_model(&m).with_sweeps(100).with_seed(77);
        assert_eq!(sa_sample(&m, &cfg).unwrap(), sa_sample(&m, &cfg).unwrap());
        let other = cfg.clone().with_seed(78);
        assert_eq!(sa_sample(&m, &other).unwrap().model_fingerprint(), m.fingerprint());
    }

    #[test]
    fn config_validation() {
        let m = QuboModel::empty(2);
        let base = SaConfig::for_model(&m);
        for bad in [
            SaConfig { t_final: 0.0, ..base.clone() },
            SaConfig { t_initial: 1e-4, ..base.clone() },
            SaConfig { sweeps: 0, ..base.clone() },
            SaConfig { num_reads: 0, ..base.clone() },
        ] {
            assert!(sa_sample(&m, &bad).is_err());
        }
    }

    #[test]
    fn schedule_is_geometric() {
        let cfg = SaConfig {
            t_initial: 8.0,
            t_final: 1.0,
            sweeps: 4,
            num_reads: 1,
            seed: 0,
        };
        let s = cfg.schedule();
        for (got, want) in s.iter().zip([8.0, 4.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn near_zero_temperature_accepts_only_non_worsening() {
        let m = random_model(11, 12, 0.7);
        let schedule = vec![1e-12; 20];
        let mut rng = stream_rng(5, 0);
        let mut worsening = 0;
        let mut accepted_worse = 0;
        anneal_with(&m, None, &schedule, &mut rng, |ev| {
            assert!(ev.temperature <= 1e-12);
            if ev.delta > 0.0 {
                worsening += 1;
                accepted_worse += usize::from(ev.accepted);
            }
            if ev.delta <= 0.0 {
                assert!(ev.accepted);
            }
        });
        assert!(worsening > 0);
        assert_eq!(accepted_worse, 0);
    }

    #[test]
    fn anneal_read_matches_sa_stream() {
        let m = random_model(21, 9, 0.5);
        let cfg = SaConfig::for_model(&m).with_sweeps(50).with_reads(1).with_seed(4);
        let read = anneal_read(&m, None, &cfg, 0).unwrap();
        let set = sa_sample(&m, &cfg).unwrap();
        assert_eq!(set.best().unwrap().sample, read.sample);
    }

    #[test]
    fn reaches_exhaustive_optimum_on_small_models() {
        let mut hits = 0;
        for seed in 0..200u64 {
            let n = 2 + (seed % 11) as usize;
            let m = random_model(5000 + seed, n, 0.5);
            let (_, opt) = exhaustive_minimum(&m);
            let cfg = SaConfig::for_model(&m).with_seed(seed);
            let best = sa_sample(&m, &cfg).unwrap().best().unwrap().energy;
            if (best - opt).abs() <= 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 190, "sa optimum rate {hits}/200");
    }
}
