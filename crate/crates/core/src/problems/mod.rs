//! Native combinatorial problems: instance types, their original objective
//! functions, and brute-force enumerators.
//!
//! Nothing in this module touches the QUBO layer, so the enumerators can serve
//! as independent oracles for the encoders and solvers.

pub mod brute;
mod io;
pub mod tsplib;

use serde::{Deserialize, Serialize};

use crate::qubo::Fingerprint;

pub use io::{load_instance, parse_instance};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

const SYMMETRY_TOL: f64 = 1e-9;

fn check_distance_matrix(dist: &[Vec<f64>], what: &str) -> Result<(), ProblemError> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(ProblemError::Invalid(format!(
                "{what}: distance row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(ProblemError::Invalid(format!(
                    "{what}: distance ({i}, {j}) = {d} is not a non-negative number"
                )));
            }
        }
        if row[i] != 0.0 {
            return Err(ProblemError::Invalid(format!("{what}: non-zero diagonal at {i}")));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if (dist[i][j] - dist[j][i]).abs() > SYMMETRY_TOL {
                return Err(ProblemError::Invalid(format!(
                    "{what}: asymmetric distances ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn max_entry(dist: &[Vec<f64>]) -> f64 {
    dist.iter().flatten().copied().fold(0.0, f64::max)
}

/// Symmetric travelling salesman instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    #[serde(default)]
    pub name: String,
    pub dist: Vec<Vec<f64>>,
}

impl TspInstance {
    pub fn new(name: impl Into<String>, dist: Vec<Vec<f64>>) -> Result<Self, ProblemError> {
        let inst = TspInstance {
            name: name.into(),
            dist,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        check_distance_matrix(&self.dist, "tsp")
    }

    pub fn num_nodes(&self) -> usize {
        self.dist.len()
    }

    pub fn max_distance(&self) -> f64 {
        max_entry(&self.dist)
    }

    /// Length of the closed tour, or `None` if `tour` is not a permutation of
    /// all nodes.
    pub fn tour_length(&self, tour: &[usize]) -> Option<f64> {
        let n = self.num_nodes();
        if tour.len() != n || !is_permutation(tour, n) {
            return None;
        }
        Some(
            (0..n)
                .map(|p| self.dist[tour[p]][tour[(p + 1) % n]])
                .sum(),
        )
    }
}

/// Vehicle routing instance. Node 0 is the depot; clients are nodes `1..=n_clients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VrpInstance {
    #[serde(default)]
    pub name: String,
    pub dist: Vec<Vec<f64>>,
    pub vehicles: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
}

impl VrpInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        check_distance_matrix(&self.dist, "vrp")?;
        if self.dist.len() < 2 {
            return Err(ProblemError::Invalid("vrp: needs a depot and at least one client".into()));
        }
        if self.vehicles == 0 {
            return Err(ProblemError::Invalid("vrp: vehicles must be positive".into()));
        }
        match (&self.demands, self.capacity) {
            (None, None) => {}
            (Some(d), Some(cap)) => {
                if !(cap > 0.0) {
                    return Err(ProblemError::Invalid("vrp: capacity must be positive".into()));
                }
                if d.len() != self.num_clients() {
                    return Err(ProblemError::Invalid(format!(
                        "vrp: {} demands for {} clients",
                        d.len(),
                        self.num_clients()
                    )));
                }
                if let Some(q) = d.iter().find(|&&q| !(q >= 0.0) || q > cap) {
                    return Err(ProblemError::Invalid(format!(
                        "vrp: demand {q} outside [0, capacity]"
                    )));
                }
            }
            _ => {
                return Err(ProblemError::Invalid(
                    "vrp: demands and capacity must be given together".into(),
                ))
            }
        }
        Ok(())
    }

    pub fn num_clients(&self) -> usize {
        self.dist.len() - 1
    }

    pub fn max_distance(&self) -> f64 {
        max_entry(&self.dist)
    }

    pub fn has_capacity(&self) -> bool {
        self.capacity.is_some()
    }

    /// Demand of client node `node` (1-based node index), zero when uncapacitated.
    pub fn demand(&self, node: usize) -> f64 {
        self.demands.as_ref().map_or(0.0, |d| d[node - 1])
    }

    /// Depot-to-depot length of one route of client nodes; an empty route is 0.
    pub fn route_length(&self, route: &[usize]) -> f64 {
        if route.is_empty() {
            return 0.0;
        }
        let mut len = self.dist[0][route[0]] + self.dist[route[route.len() - 1]][0];
        for w in route.windows(2) {
            len += self.dist[w[0]][w[1]];
        }
        len
    }

    /// Total length of `routes`, or `None` if they are not a valid solution:
    /// every client exactly once, at most `vehicles` routes, loads within capacity.
    pub fn solution_length(&self, routes: &[Vec<usize>]) -> Option<f64> {
        if routes.len() > self.vehicles {
            return None;
        }
        let mut seen = vec![false; self.num_clients() + 1];
        for route in routes {
            for &c in route {
                if c == 0 || c > self.num_clients() || seen[c] {
                    return None;
                }
                seen[c] = true;
            }
            if let Some(cap) = self.capacity {
                let load: f64 = route.iter().map(|&c| self.demand(c)).sum();
                if load > cap + 1e-9 {
                    return None;
                }
            }
        }
        if !seen[1..].iter().all(|&s| s) {
            return None;
        }
        Some(routes.iter().map(|r| self.route_length(r)).sum())
    }
}

/// One-dimensional bin packing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BppInstance {
    #[serde(default)]
    pub name: String,
    pub weights: Vec<f64>,
    pub capacity: f64,
    pub max_bins: usize,
}

impl BppInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if !(self.capacity > 0.0) || !self.capacity.is_finite() {
            return Err(ProblemError::Invalid("bpp: capacity must be positive".into()));
        }
        if self.max_bins == 0 {
            return Err(ProblemError::Invalid("bpp: max_bins must be positive".into()));
        }
        if let Some(w) = self.weights.iter().find(|&&w| !(w > 0.0) || w > self.capacity) {
            return Err(ProblemError::Invalid(format!(
                "bpp: weight {w} outside (0, capacity]"
            )));
        }
        let total: f64 = self.weights.iter().sum();
        let lower = (total / self.capacity - 1e-9).ceil() as usize;
        if self.max_bins < lower {
            return Err(ProblemError::Invalid(format!(
                "bpp: max_bins {} below the volume bound {lower}",
                self.max_bins
            )));
        }
        Ok(())
    }

    pub fn num_items(&self) -> usize {
        self.weights.len()
    }

    /// Number of non-empty bins, or `None` if the assignment overfills a bin or
    /// uses a bin index `>= max_bins`.
    pub fn bins_used(&self, assignment: &[usize]) -> Option<f64> {
        if assignment.len() != self.num_items() {
            return None;
        }
        let mut load = vec![0.0; self.max_bins];
        for (item, &bin) in assignment.iter().enumerate() {
            if bin >= self.max_bins {
                return None;
            }
            load[bin] += self.weights[item];
        }
        if load.iter().any(|&l| l > self.capacity + 1e-9) {
            return None;
        }
        Some(load.iter().filter(|&&l| l > 0.0).count() as f64)
    }
}

/// Weighted maximum cut instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McpInstance {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl McpInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j, w) in &self.edges {
            if i >= j {
                return Err(ProblemError::Invalid(format!(
                    "mcp: edge ({i}, {j}) must satisfy i < j (no self-loops)"
                )));
            }
            if j >= self.n {
                return Err(ProblemError::Invalid(format!("mcp: edge ({i}, {j}) out of range")));
            }
            if !w.is_finite() {
                return Err(ProblemError::Invalid(format!("mcp: edge ({i}, {j}) weight {w}")));
            }
            if !seen.insert((i, j)) {
                return Err(ProblemError::Invalid(format!("mcp: duplicate edge ({i}, {j})")));
            }
        }
        Ok(())
    }

    /// Total weight of edges whose endpoints lie on different sides.
    pub fn cut_value(&self, side: &[u8]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(i, j, _)| side[i] != side[j])
            .map(|&(_, _, w)| w)
            .sum()
    }
}

/// Any of the four supported problem classes, as stored in instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemInstance {
    Tsp(TspInstance),
    Vrp(VrpInstance),
    Bpp(BppInstance),
    Mcp(McpInstance),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp,
    Vrp,
    Bpp,
    Mcp,
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::Tsp(_) => ProblemKind::Tsp,
            ProblemInstance::Vrp(_) => ProblemKind::Vrp,
            ProblemInstance::Bpp(_) => ProblemKind::Bpp,
            ProblemInstance::Mcp(_) => ProblemKind::Mcp,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ProblemInstance::Tsp(i) => &i.name,
            ProblemInstance::Vrp(i) => &i.name,
            ProblemInstance::Bpp(i) => &i.name,
            ProblemInstance::Mcp(i) => &i.name,
        }
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        let name = name.into();
        match self {
            ProblemInstance::Tsp(i) => i.name = name,
            ProblemInstance::Vrp(i) => i.name = name,
            ProblemInstance::Bpp(i) => i.name = name,
            ProblemInstance::Mcp(i) => i.name = name,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        match self {
            ProblemInstance::Tsp(i) => i.validate(),
            ProblemInstance::Vrp(i) => i.validate(),
            ProblemInstance::Bpp(i) => i.validate(),
            ProblemInstance::Mcp(i) => i.validate(),
        }
    }

    /// Content hash of the canonical JSON form.
    pub fn fingerprint(&self) -> Fingerprint {
        let json = serde_json::to_vec(self).expect("instance serializes");
        Fingerprint::of_bytes(&json)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

fn is_permutation(items: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    for &x in items {
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square4() -> TspInstance {
        let mut d = vec![vec![10.0; 4]; 4];
        for i in 0..4 {
            d[i][i] = 0.0;
            d[i][(i + 1) % 4] = 1.0;
            d[(i + 1) % 4][i] = 1.0;
        }
        TspInstance::new("square", d).unwrap()
    }

    #[test]
    fn tour_length_closes_the_cycle() {
        let t = square4();
        assert_eq!(t.tour_length(&[0, 1, 2, 3]), Some(4.0));
        assert_eq!(t.tour_length(&[0, 2, 1, 3]), Some(22.0));
        assert_eq!(t.tour_length(&[0, 1, 1, 3]), None);
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        assert!(TspInstance::new("x", vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(TspInstance::new("x", vec![vec![1.0]]).is_err());
        assert!(TspInstance::new("x", vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn vrp_solution_checks() {
        let v = VrpInstance {
            name: "v".into(),
            dist: vec![
                vec![0.0, 2.0, 3.0],
                vec![2.0, 0.0, 4.0],
                vec![3.0, 4.0, 0.0],
            ],
            vehicles: 2,
            demands: Some(vec![3.0, 3.0]),
            capacity: Some(5.0),
        };
        v.validate().unwrap();
        assert_eq!(v.solution_length(&[vec![1], vec![2]]), Some(10.0));
        // over capacity
        assert_eq!(v.solution_length(&[vec![1, 2]]), None);
        assert_eq!(v.solution_length(&[vec![1]]), None);
        assert_eq!(v.route_length(&[]), 0.0);
    }

    #[test]
    fn bpp_counts_non_empty_bins() {
        let b = BppInstance {
            name: "b".into(),
            weights: vec![6.0, 4.0, 5.0],
            capacity: 10.0,
            max_bins: 3,
        };
        b.validate().unwrap();
        assert_eq!(b.bins_used(&[0, 0, 2]), Some(2.0));
        assert_eq!(b.bins_used(&[0, 2, 0]), None);
        let tight = BppInstance { max_bins: 1, ..b };
        assert!(tight.validate().is_err());
    }

    #[test]
    fn mcp_validation_and_cut() {
        let g = McpInstance {
            name: "g".into(),
            n: 3,
            edges: vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        };
        g.validate().unwrap();
        assert_eq!(g.cut_value(&[0, 1, 1]), 2.0);
        assert_eq!(g.cut_value(&[1, 0, 0]), 2.0);
        let loops = McpInstance { edges: vec![(1, 1, 1.0)], ..g.clone() };
        assert!(loops.validate().is_err());
        let dup = McpInstance { edges: vec![(0, 1, 1.0), (0, 1, 2.0)], ..g };
        assert!(dup.validate().is_err());
    }
}
