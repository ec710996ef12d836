//! Desk-scale instances small enough for the native enumerators in
//! `hyqubo::problems::brute`, which supply the reference optima.

use std::path::{Path, PathBuf};

use hyqubo::problems::{brute, BppInstance, McpInstance, ProblemInstance, ProblemKind, TspInstance, VrpInstance};
use hyqubo::rng::stream_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const MANIFEST_FILE: &str = "manifest.json";

const TSP_SIZES: [usize; 3] = [4, 5, 6];
/// (clients, vehicles)
const VRP_SIZES: [(usize, usize); 4] = [(3, 1), (4, 1), (4, 2), (5, 1)];
const BPP_SIZES: [usize; 4] = [3, 4, 5, 6];
const BPP_CAPACITY: f64 = 10.0;
const MCP_SIZES: [usize; 4] = [6, 8, 10, 12];

#[derive(Debug, Clone, PartialEq)]
pub struct MicroInstance {
    pub instance: ProblemInstance,
    /// Native optimum: shortest tour or route set, fewest bins, heaviest cut.
    pub optimum: f64,
}

impl MicroInstance {
    pub fn file_name(&self) -> String {
        format!("{}.json", self.instance.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub name: String,
    pub kind: ProblemKind,
    pub optimum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn instance_paths(&self, dir: &Path) -> Vec<PathBuf> {
        self.entries.iter().map(|e| dir.join(&e.file)).collect()
    }

    pub fn optimum_of(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.optimum)
    }
}

/// Brute-force optimum of any instance small enough to enumerate.
pub fn native_optimum(inst: &ProblemInstance) -> Option<f64> {
    match inst {
        ProblemInstance::Tsp(i) => Some(brute::tsp_optimum(i).1),
        ProblemInstance::Vrp(i) => brute::vrp_optimum(i).map(|(_, v)| v),
        ProblemInstance::Bpp(i) => brute::bpp_optimum(i).map(|(_, v)| v),
        ProblemInstance::Mcp(i) => Some(brute::mcp_optimum(i).1),
    }
}

fn euclidean(points: &[(i64, i64)]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|&(ax, ay)| {
            points
                .iter()
                .map(|&(bx, by)| (((ax - bx).pow(2) + (ay - by).pow(2)) as f64).sqrt().round())
                .collect()
        })
        .collect()
}

fn random_points(rng: &mut impl Rng, count: usize) -> Vec<(i64, i64)> {
    (0..count)
        .map(|_| (rng.random_range(0..100), rng.random_range(0..100)))
        .collect()
}

/// Bins used by first-fit decreasing, a feasible upper bound on the optimum.
fn first_fit_decreasing(weights: &[f64], capacity: f64) -> usize {
    let mut sorted = weights.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut loads: Vec<f64> = Vec::new();
    for w in sorted {
        match loads.iter_mut().find(|l| **l + w <= capacity) {
            Some(l) => *l += w,
            None => loads.push(w),
        }
    }
    loads.len()
}

/// The micro corpus for `seed`. Instance `k` draws from stream `k`, so the
/// corpus is stable under edits to other instances.
pub fn micro_instances(seed: u64) -> Vec<MicroInstance> {
    let mut out = Vec::new();
    let mut stream = 0u64;
    let mut next_rng = || {
        stream += 1;
        stream_rng(seed, stream)
    };
    for n in TSP_SIZES {
        let dist = euclidean(&random_points(&mut next_rng(), n));
        out.push(ProblemInstance::Tsp(TspInstance::new(format!("tsp{n}"), dist).expect("euclidean matrix is valid")));
    }
    for (clients, vehicles) in VRP_SIZES {
        out.push(ProblemInstance::Vrp(VrpInstance {
            name: format!("vrp{clients}k{vehicles}"),
            dist: euclidean(&random_points(&mut next_rng(), clients + 1)),
            vehicles,
            demands: None,
            capacity: None,
        }));
    }
    for items in BPP_SIZES {
        let mut rng = next_rng();
        let weights: Vec<f64> = (0..items).map(|_| rng.random_range(2..=7) as f64).collect();
        out.push(ProblemInstance::Bpp(BppInstance {
            name: format!("bpp{items}"),
            max_bins: first_fit_decreasing(&weights, BPP_CAPACITY),
            weights,
            capacity: BPP_CAPACITY,
        }));
    }
    out.push(ProblemInstance::Mcp(McpInstance {
        name: "mcp3".into(),
        n: 3,
        edges: vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)],
    }));
    for n in MCP_SIZES {
        let mut rng = next_rng();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.5) {
                    edges.push((i, j, rng.random_range(1..=5) as f64));
                }
            }
        }
        out.push(ProblemInstance::Mcp(McpInstance {
            name: format!("mcp{n}"),
            n,
            edges,
        }));
    }
    out.into_iter()
        .map(|instance| {
            let optimum = native_optimum(&instance).expect("micro instances are feasible");
            MicroInstance { instance, optimum }
        })
        .collect()
}

/// Writes the corpus for `seed` and its manifest into `out`.
pub fn gen_micro_instances(seed: u64, out: &Path) -> Result<Manifest, HarnessError> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut entries = Vec::new();
    for m in micro_instances(seed) {
        let file = m.file_name();
        let path = out.join(&file);
        std::fs::write(&path, m.instance.to_json_pretty() + "\n").map_err(|e| HarnessError::io(&path, e))?;
        entries.push(ManifestEntry {
            file,
            name: m.instance.name().to_string(),
            kind: m.instance.kind(),
            optimum: m.optimum,
        });
    }
    let manifest = Manifest { seed, entries };
    let path = out.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(manifest)
}
