//! Branch-and-bound with a primal-heuristic portfolio.
//!
//! Primal heuristics seed the incumbent and keep running in the background
//! while a best-first tree search proves (or bounds) optimality. Nodes fix a
//! prefix of a static variable order; subtrees with few free variables are
//! closed by exhaustive enumeration of the clamped sub-model.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{exact_solve, AnnealBackend, SharedSampler, EXACT_MAX_VARS};
use crate::decomposer::{clamp, overwrite, qbsolv_solve, DecomposerConfig};
use crate::heuristics::{sa_sample, tabu_search, SaConfig, TabuConfig};
use crate::portfolio::{initial_sample, BranchKind, BranchSpec, PortfolioError};
use crate::qubo::{QuboError, QuboModel, Sample, SampleRecord};
use crate::rng::derive_seed;

/// Nodes whose bound is within this of the incumbent are pruned.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BnbError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Branching {
    /// Static order by `|linear| + sum |quadratic|`, largest first.
    #[default]
    ImpactDescending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Proven,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct BnbConfig {
    pub primals: Vec<BranchSpec>,
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
    /// Subtrees with at most this many free variables are enumerated.
    pub leaf_size: usize,
    /// Block size of the node relaxation; 1 is the plain term-wise bound.
    pub bound_block: usize,
    pub branching: Branching,
    /// Keep re-running the primals with fresh seeds during the search.
    pub background_primals: bool,
    pub seed: u64,
}

impl BnbConfig {
    /// Tabu, annealing and decomposition on `backend` as primals.
    pub fn standard(backend: SharedSampler, seed: u64) -> Self {
        BnbConfig {
            primals: vec![
                BranchSpec {
                    kind: BranchKind::Tabu(TabuConfig::default()),
                    seed: derive_seed(seed, 1),
                },
                BranchSpec {
                    kind: BranchKind::Sa { sweeps: 1000 },
                    seed: derive_seed(seed, 2),
                },
                BranchSpec::quantum(backend, 0.1, derive_seed(seed, 3)),
            ],
            node_limit: 5_000_000,
            time_limit: None,
            leaf_size: 16,
            bound_block: 12,
            branching: Branching::ImpactDescending,
            background_primals: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), BnbError> {
        if self.leaf_size > EXACT_MAX_VARS {
            return Err(BnbError::InvalidConfig(format!(
                "leaf_size {} exceeds the exact cap {EXACT_MAX_VARS}",
                self.leaf_size
            )));
        }
        if self.node_limit == 0 {
            return Err(BnbError::InvalidConfig("node_limit must be positive".into()));
        }
        if self.bound_block == 0 || self.bound_block > EXACT_MAX_VARS {
            return Err(BnbError::InvalidConfig(format!(
                "bound_block must lie in 1..={EXACT_MAX_VARS}"
            )));
        }
        Ok(())
    }
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self::standard(Arc::new(AnnealBackend::new()), 0)
    }
}

/// One progress log entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub nodes: u64,
    pub incumbent: f64,
    pub bound: f64,
    pub gap: f64,
}

impl fmt::Display for Progress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nodes={} incumbent={} bound={} gap={:.6}",
            self.nodes, self.incumbent, self.bound, self.gap
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult {
    pub incumbent: SampleRecord,
    pub lower_bound: f64,
    pub gap: f64,
    pub proven_optimal: bool,
    pub nodes_explored: u64,
    pub termination: Termination,
    pub progress: Vec<Progress>,
}

/// Relative optimality gap of `incumbent` over `bound`.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1e-12)).max(0.0)
}

/// Term-wise lower bound over all completions of `fixed` (`None` = free).
///
/// Fixed terms are evaluated exactly; terms between a fixed and a free
/// variable become linear. Each free variable then contributes
/// `min(0, l_i + sum_{j > i free} min(0, q_ij))`, counting every free-free
/// quadratic term once.
pub fn partial_lower_bound(model: &QuboModel, fixed: &[Option<bool>]) -> Result<f64, QuboError> {
    model.check_len(fixed.len())?;
    let singletons: Vec<usize> = (0..fixed.len()).collect();
    Ok(relaxed_bound(model, fixed, &singletons))
}

fn fill(fixed: &[Option<bool>]) -> Vec<u8> {
    fixed.iter().map(|v| u8::from(v.unwrap_or(false))).collect()
}

/// Lower bound over completions of `fixed` from a partition of the
/// variables (`block_of[i]` numbers the block of `i`). Every block of free
/// variables is minimised exactly; a negative term between two blocks is
/// charged to the linear term of its endpoint in the lower-numbered block
/// (valid since `q x_i x_j >= q x_i` for `q < 0`), a positive one is
/// dropped. Singleton blocks numbered by index give the term-wise bound.
fn relaxed_bound(model: &QuboModel, fixed: &[Option<bool>], block_of: &[usize]) -> f64 {
    let n = model.num_variables();
    let mut bound = model.offset();
    let mut lin: Vec<f64> = (0..n).map(|i| model.linear(i)).collect();
    for i in 0..n {
        if fixed[i] == Some(true) {
            bound += lin[i];
        }
    }
    for (&(i, j), &c) in model.quadratic_terms() {
        match (fixed[i], fixed[j]) {
            (Some(true), Some(true)) => bound += c,
            (Some(true), None) => lin[j] += c,
            (None, Some(true)) => lin[i] += c,
            (None, None) if c < 0.0 && block_of[i] != block_of[j] => {
                let v = if block_of[i] < block_of[j] { i } else { j };
                lin[v] += c;
            }
            _ => {}
        }
    }
    let blocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for i in (0..n).filter(|&i| fixed[i].is_none()) {
        members[block_of[i]].push(i);
    }
    let mut local = vec![usize::MAX; n];
    for block in members.iter().filter(|b| !b.is_empty()) {
        if let [v] = block[..] {
            bound += lin[v].min(0.0);
            continue;
        }
        let k = block.len();
        for (a, &v) in block.iter().enumerate() {
            local[v] = a;
        }
        let mut q = vec![0.0; k * k];
        for (a, &v) in block.iter().enumerate() {
            for &(u, c) in model.neighbors(v) {
                let b = local[u];
                if b != usize::MAX && fixed[u].is_none() && block_of[u] == block_of[v] {
                    q[a * k + b] = c;
                }
            }
        }
        let block_lin: Vec<f64> = block.iter().map(|&v| lin[v]).collect();
        bound += dense_minimum(&block_lin, &q);
        for &v in block {
            local[v] = usize::MAX;
        }
    }
    bound
}

/// Minimum of a small dense QUBO (symmetric `q`, zero diagonal) by
/// Gray-code enumeration.
fn dense_minimum(lin: &[f64], q: &[f64]) -> f64 {
    let k = lin.len();
    debug_assert!(k <= EXACT_MAX_VARS);
    let mut field = lin.to_vec();
    let mut bits = vec![false; k];
    let mut energy = 0.0;
    let mut best: f64 = 0.0;
    for step in 1u64..(1u64 << k) {
        let i = step.trailing_zeros() as usize;
        let on = !bits[i];
        bits[i] = on;
        let sign = if on { 1.0 } else { -1.0 };
        energy += sign * field[i];
        let row = &q[i * k..(i + 1) * k];
        for (f, &c) in field.iter_mut().zip(row) {
            *f += sign * c;
        }
        best = best.min(energy);
    }
    best
}

/// Static branching order.
pub fn branching_order(model: &QuboModel, branching: Branching) -> Vec<usize> {
    match branching {
        Branching::ImpactDescending => {
            let weight = |i: usize| {
                model.linear(i).abs() + model.neighbors(i).iter().map(|&(_, q)| q.abs()).sum::<f64>()
            };
            let mut order: Vec<(usize, f64)> = (0..model.num_variables()).map(|i| (i, weight(i))).collect();
            order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            order.into_iter().map(|(i, _)| i).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    bound: f64,
    /// Values of `order[..values.len()]`.
    values: Vec<u8>,
}

impl Eq for Node {}

impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the lowest bound,
    // then the deepest, then the lexicographically smallest prefix.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.values.len().cmp(&other.values.len()))
            .then(other.values.cmp(&self.values))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'m> {
    model: &'m QuboModel,
    order: Vec<usize>,
    leaf_size: usize,
    /// Partitions used by the node relaxation, as block numbers per
    /// variable; the node bound is the best over all of them.
    partitions: Vec<Vec<usize>>,
}

/// Groups variables into blocks of at most `size`, merging along the
/// strongest couplings first (ties by index pair), so that the terms the
/// relaxation drops are the weak ones. Blocks are numbered by the position
/// of their first member in `order`.
fn coupling_partition(model: &QuboModel, order: &[usize], size: usize) -> Vec<usize> {
    let n = model.num_variables();
    let mut edges: Vec<((usize, usize), f64)> = model.quadratic_terms().iter().map(|(&k, &c)| (k, c.abs())).collect();
    edges.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut count = vec![1usize; n];
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for ((i, j), _) in edges {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri != rj && count[ri] + count[rj] <= size {
            parent[ri.max(rj)] = ri.min(rj);
            count[ri.min(rj)] += count[ri.max(rj)];
        }
    }
    let mut number = vec![usize::MAX; n];
    let mut block_of = vec![0; n];
    let mut next = 0;
    for &v in order {
        let r = root(&mut parent, v);
        if number[r] == usize::MAX {
            number[r] = next;
            next += 1;
        }
        block_of[v] = number[r];
    }
    block_of
}

/// Node relaxations: singletons (the term-wise bound), consecutive runs of
/// the branching order, and coupling clusters.
fn partitions(model: &QuboModel, order: &[usize], size: usize) -> Vec<Vec<usize>> {
    let n = model.num_variables();
    let mut parts = vec![(0..n).collect::<Vec<usize>>()];
    if size > 1 {
        let mut chunks = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            chunks[v] = k / size;
        }
        parts.push(chunks);
        parts.push(coupling_partition(model, order, size));
    }
    parts
}

fn clamp_partial(model: &QuboModel, fixed: &[Option<bool>]) -> Option<(QuboModel, Vec<usize>)> {
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
    if free.is_empty() {
        return None;
    }
    let base = Sample::new(fill(fixed)).expect("binary");
    Some(clamp(model, &base, &free).expect("valid free subset"))
}

enum Expansion {
    Leaf(SampleRecord),
    Children(Vec<Node>),
}

impl Search<'_> {
    fn fixed(&self, values: &[u8]) -> Vec<Option<bool>> {
        let mut fixed = vec![None; self.model.num_variables()];
        for (&v, &x) in self.order.iter().zip(values) {
            fixed[v] = Some(x == 1);
        }
        fixed
    }

    fn bound(&self, values: &[u8]) -> f64 {
        let fixed = self.fixed(values);
        self.partitions
            .iter()
            .map(|p| relaxed_bound(self.model, &fixed, p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn expand(&self, node: &Node) -> Expansion {
        let free = self.order.len() - node.values.len();
        if free <= self.leaf_size {
            let fixed = self.fixed(&node.values);
            let base = Sample::new(fill(&fixed)).expect("binary");
            let record = match clamp_partial(self.model, &fixed) {
                None => SampleRecord::new(self.model, base).expect("full length"),
                Some((sub, remap)) => {
                    let best = exact_solve(&sub).expect("leaf within exact cap");
                    SampleRecord::new(self.model, overwrite(&base, &remap, &best.sample)).expect("full length")
                }
            };
            return Expansion::Leaf(record);
        }
        let children = [0u8, 1u8]
            .iter()
            .map(|&x| {
                let mut values = node.values.clone();
                values.push(x);
                let bound = self.bound(&values).max(node.bound);
                Node { bound, values }
            })
            .collect();
        Expansion::Children(children)
    }
}

/// Runs one primal heuristic to completion.
pub fn run_primal(model: &QuboModel, spec: &BranchSpec, seed: u64) -> Result<SampleRecord, PortfolioError> {
    let n = model.num_variables();
    Ok(match &spec.kind {
        BranchKind::Tabu(cfg) => {
            let cfg = TabuConfig { seed, ..cfg.clone() };
            tabu_search(model, &initial_sample(n, seed), &cfg)?
        }
        BranchKind::Sa { sweeps } => {
            let cfg = SaConfig::for_model(model).with_sweeps(*sweeps).with_seed(seed);
            sa_sample(model, &cfg)?.best().cloned().expect("num_reads > 0")
        }
        BranchKind::QuantumDecomposed { backend, fraction } => {
            let cfg = DecomposerConfig {
                fraction: *fraction,
                backend: backend.clone(),
                seed,
                ..DecomposerConfig::default()
            };
            qbsolv_solve(model, &cfg)?
        }
    })
}

fn primal_round(model: &QuboModel, primals: &[BranchSpec], round: u64) -> Option<SampleRecord> {
    let results: Vec<Option<SampleRecord>> = primals
        .par_iter()
        .map(|p| {
            let seed = if round == 0 { p.seed } else { derive_seed(p.seed, round) };
            match run_primal(model, p, seed) {
                Ok(r) => Some(r),
                Err(e) => {
                    log::warn!("bnb: {} primal failed: {e}", p.label());
                    None
                }
            }
        })
        .collect();
    results
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.better_than(&a) { b } else { a })
}

/// Incumbent shared with the background primals; only strictly lower
/// energies replace it.
struct SharedIncumbent(Mutex<Option<SampleRecord>>);

impl SharedIncumbent {
    fn offer(&self, candidate: SampleRecord) {
        let mut slot = self.0.lock().expect("incumbent lock");
        if slot.as_ref().is_none_or(|cur| candidate.energy < cur.energy) {
            *slot = Some(candidate);
        }
    }

    fn take(&self) -> Option<SampleRecord> {
        self.0.lock().expect("incumbent lock").take()
    }
}

const BACKGROUND_ROUNDS: u64 = 16;
const LOG_EVERY: u64 = 10_000;

/// Primal portfolio plus best-first branch-and-bound.
///
/// Returns `Proven` with gap 0 once every node is closed; otherwise stops at
/// the node or time limit and reports the gap to the smallest open bound.
pub fn branch_and_bound(model: &QuboModel, cfg: &BnbConfig) -> Result<BnbResult, BnbError> {
    cfg.validate()?;
    let started = Instant::now();
    let n = model.num_variables();

    let mut incumbent = primal_round(model, &cfg.primals, 0)
        .unwrap_or_else(|| SampleRecord::new(model, Sample::zeros(n)).expect("full length"));

    let order = branching_order(model, cfg.branching);
    let search = Search {
        model,
        partitions: partitions(model, &order, cfg.bound_block),
        order,
        leaf_size: cfg.leaf_size,
    };
    let shared = SharedIncumbent(Mutex::new(None));
    let stop = AtomicBool::new(false);

    let outcome = std::thread::scope(|scope| {
        if cfg.background_primals && !cfg.primals.is_empty() && n > cfg.leaf_size {
            // A private pool: the caller may itself hold the only worker of
            // the global pool while it searches.
            match rayon::ThreadPoolBuilder::new()
                .num_threads(rayon::current_num_threads())
                .build()
            {
                Ok(pool) => {
                    let (stop, shared) = (&stop, &shared);
                    scope.spawn(move || {
                        for round in 1..=BACKGROUND_ROUNDS {
                            if stop.load(AtomicOrdering::Relaxed) {
                                break;
                            }
                            if let Some(r) = pool.install(|| primal_round(model, &cfg.primals, round)) {
                                shared.offer(r);
                            }
                        }
                    });
                }
                Err(e) => log::warn!("bnb: no background primals: {e}"),
            }
        }
        let outcome = tree_search(&search, cfg, started, &mut incumbent, &shared);
        stop.store(true, AtomicOrdering::Relaxed);
        outcome
    });
    if let Some(r) = shared.take() {
        if r.energy < incumbent.energy && outcome.termination != Termination::Proven {
            incumbent = r;
        }
    }

    let (lower_bound, gap) = match outcome.termination {
        Termination::Proven => (incumbent.energy, 0.0),
        _ => {
            let lb = outcome.open_bound.min(incumbent.energy);
            (lb, relative_gap(incumbent.energy, lb))
        }
    };
    let mut progress = outcome.progress;
    progress.push(Progress {
        nodes: outcome.nodes,
        incumbent: incumbent.energy,
        bound: lower_bound,
        gap,
    });
    log::info!("bnb: {}", progress.last().expect("just pushed"));
    Ok(BnbResult {
        proven_optimal: outcome.termination == Termination::Proven,
        incumbent,
        lower_bound,
        gap,
        nodes_explored: outcome.nodes,
        termination: outcome.termination,
        progress,
    })
}

struct Outcome {
    termination: Termination,
    nodes: u64,
    open_bound: f64,
    progress: Vec<Progress>,
}

fn tree_search(
    search: &Search<'_>,
    cfg: &BnbConfig,
    started: Instant,
    incumbent: &mut SampleRecord,
    shared: &SharedIncumbent,
) -> Outcome {
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: search.bound(&[]),
        values: Vec::new(),
    });
    let mut nodes = 0u64;
    let mut progress = Vec::new();
    let mut logged_incumbent = f64::NAN;

    while let Some(node) = heap.pop() {
        if let Some(r) = shared.take() {
            if r.energy < incumbent.energy {
                *incumbent = r;
            }
        }
        if node.bound >= incumbent.energy - PRUNE_TOL {
            // Best-first: every open node is at least this bound.
            heap.clear();
            break;
        }
        let stop = if nodes >= cfg.node_limit {
            Some(Termination::NodeLimit)
        } else if cfg.time_limit.is_some_and(|t| started.elapsed() >= t) {
            Some(Termination::TimeLimit)
        } else {
            None
        };
        if let Some(termination) = stop {
            return Outcome {
                termination,
                nodes,
                open_bound: node.bound,
                progress,
            };
        }
        if incumbent.energy != logged_incumbent || nodes % LOG_EVERY == 0 {
            let p = Progress {
                nodes,
                incumbent: incumbent.energy,
                bound: node.bound,
                gap: relative_gap(incumbent.energy, node.bound),
            };
            log::info!("bnb: {p}");
            progress.push(p);
            logged_incumbent = incumbent.energy;
        }
        nodes += 1;
        match search.expand(&node) {
            Expansion::Leaf(record) => {
                if record.energy < incumbent.energy {
                    *incumbent = record;
                }
            }
            Expansion::Children(children) => {
                for child in children {
                    if child.bound < incumbent.energy - PRUNE_TOL {
                        heap.push(child);
                    }
                }
            }
        }
    }
    Outcome {
        termination: Termination::Proven,
        nodes,
        open_bound: incumbent.energy,
        progress,
    }
}
