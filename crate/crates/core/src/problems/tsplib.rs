//! Reader for the subset of TSPLIB used by small published TSP and CVRP
//! instances: `TYPE: TSP | CVRP`, `EDGE_WEIGHT_TYPE: EXPLICIT | EUC_2D`.
//!
//! CVRP demands and capacity are parsed but only attached to the instance
//! when [`Options::with_capacity`] is set; by default the fleet size is the
//! only routing constraint. The fleet size comes from a `VEHICLES` entry, or a
//! `-k<N>` suffix in `NAME`, and falls back to one vehicle.

use std::collections::BTreeMap;

use super::{ProblemError, ProblemInstance, TspInstance, VrpInstance};

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub with_capacity: bool,
}

pub fn parse(text: &str) -> Result<ProblemInstance, ProblemError> {
    parse_with(text, Options::default())
}

pub fn parse_with(text: &str, opts: Options) -> Result<ProblemInstance, ProblemError> {
    let file = RawFile::read(text)?;
    let dim = file.dimension()?;
    let dist = file.distances(dim)?;
    let name = file.spec.get("NAME").cloned().unwrap_or_default();
    let kind = file
        .spec
        .get("TYPE")
        .map(|t| t.to_ascii_uppercase())
        .unwrap_or_else(|| "TSP".into());
    match kind.as_str() {
        "TSP" => Ok(ProblemInstance::Tsp(TspInstance::new(name, dist)?)),
        "CVRP" | "VRP" => {
            let depot = file.depot().unwrap_or(0);
            if depot >= dim {
                return Err(ProblemError::Parse(format!("depot {} out of range", depot + 1)));
            }
            // Depot first, clients keep their relative order.
            let order: Vec<usize> = std::iter::once(depot)
                .chain((0..dim).filter(|&i| i != depot))
                .collect();
            let dist = order
                .iter()
                .map(|&i| order.iter().map(|&j| dist[i][j]).collect())
                .collect();
            let vehicles = file
                .spec
                .get("VEHICLES")
                .and_then(|v| v.parse().ok())
                .or_else(|| vehicles_from_name(&name))
                .unwrap_or(1);
            let (demands, capacity) = if opts.with_capacity {
                let cap: f64 = file
                    .spec
                    .get("CAPACITY")
                    .ok_or_else(|| ProblemError::Parse("CVRP without CAPACITY".into()))?
                    .parse()
                    .map_err(|_| ProblemError::Parse("bad CAPACITY".into()))?;
                let demand = file.demands(dim)?;
                let d = order[1..].iter().map(|&i| demand[i]).collect();
                (Some(d), Some(cap))
            } else {
                (None, None)
            };
            let inst = VrpInstance {
                name,
                dist,
                vehicles,
                demands,
                capacity,
            };
            inst.validate()?;
            Ok(ProblemInstance::Vrp(inst))
        }
        other => Err(ProblemError::Parse(format!("unsupported TYPE {other}"))),
    }
}

fn vehicles_from_name(name: &str) -> Option<usize> {
    let pos = name.rfind("-k")?;
    let digits: String = name[pos + 2..].chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

/// TSPLIB rounding for EUC_2D: nearest integer.
fn nint(x: f64) -> f64 {
    (x + 0.5).floor()
}

struct RawFile {
    spec: BTreeMap<String, String>,
    sections: BTreeMap<String, Vec<String>>,
}

impl RawFile {
    fn read(text: &str) -> Result<Self, ProblemError> {
        let mut spec = BTreeMap::new();
        let mut sections: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let upper = line.to_ascii_uppercase();
            if upper == "EOF" {
                break;
            }
            if upper.ends_with("_SECTION") {
                current = Some(upper.clone());
                sections.entry(upper).or_default();
                continue;
            }
            if let Some((key, value)) = line.split_once(':') {
                let key = key.trim().to_ascii_uppercase();
                if !key.is_empty() && key.chars().all(|c| c.is_ascii_uppercase() || c == '_') {
                    spec.insert(key, value.trim().to_string());
                    current = None;
                    continue;
                }
            }
            match &current {
                Some(sec) => sections.get_mut(sec).unwrap().push(line.to_string()),
                None => return Err(ProblemError::Parse(format!("unexpected line: {line}"))),
            }
        }
        Ok(RawFile { spec, sections })
    }

    fn dimension(&self) -> Result<usize, ProblemError> {
        self.spec
            .get("DIMENSION")
            .ok_or_else(|| ProblemError::Parse("missing DIMENSION".into()))?
            .parse()
            .map_err(|_| ProblemError::Parse("bad DIMENSION".into()))
    }

    fn numbers(&self, section: &str) -> Result<Vec<f64>, ProblemError> {
        let lines = self
            .sections
            .get(section)
            .ok_or_else(|| ProblemError::Parse(format!("missing {section}")))?;
        lines
            .iter()
            .flat_map(|l| l.split_whitespace())
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| ProblemError::Parse(format!("bad number {tok} in {section}")))
            })
            .collect()
    }

    fn distances(&self, dim: usize) -> Result<Vec<Vec<f64>>, ProblemError> {
        let ewt = self
            .spec
            .get("EDGE_WEIGHT_TYPE")
            .map(|s| s.to_ascii_uppercase())
            .unwrap_or_default();
        match ewt.as_str() {
            "EUC_2D" => {
                let nums = self.numbers("NODE_COORD_SECTION")?;
                if nums.len() != 3 * dim {
                    return Err(ProblemError::Parse(format!(
                        "NODE_COORD_SECTION has {} numbers, expected {}",
                        nums.len(),
                        3 * dim
                    )));
                }
                let coords: Vec<(f64, f64)> =
                    nums.chunks(3).map(|c| (c[1], c[2])).collect();
                Ok((0..dim)
                    .map(|i| {
                        (0..dim)
                            .map(|j| {
                                if i == j {
                                    0.0
                                } else {
                                    let (dx, dy) =
                                        (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
                                    nint((dx * dx + dy * dy).sqrt())
                                }
                            })
                            .collect()
                    })
                    .collect())
            }
            "EXPLICIT" => {
                let format = self
                    .spec
                    .get("EDGE_WEIGHT_FORMAT")
                    .map(|s| s.to_ascii_uppercase())
                    .unwrap_or_else(|| "FULL_MATRIX".into());
                let nums = self.numbers("EDGE_WEIGHT_SECTION")?;
                explicit_matrix(&format, &nums, dim)
            }
            other => Err(ProblemError::Parse(format!(
                "unsupported EDGE_WEIGHT_TYPE {other:?}"
            ))),
        }
    }

    fn demands(&self, dim: usize) -> Result<Vec<f64>, ProblemError> {
        let nums = self.numbers("DEMAND_SECTION")?;
        if nums.len() != 2 * dim {
            return Err(ProblemError::Parse("DEMAND_SECTION size mismatch".into()));
        }
        let mut d = vec![0.0; dim];
        for pair in nums.chunks(2) {
            let node = pair[0] as usize;
            if node == 0 || node > dim {
                return Err(ProblemError::Parse(format!("demand for unknown node {node}")));
            }
            d[node - 1] = pair[1];
        }
        Ok(d)
    }

    fn depot(&self) -> Option<usize> {
        let nums = self.numbers("DEPOT_SECTION").ok()?;
        nums.first().filter(|&&d| d >= 1.0).map(|&d| d as usize - 1)
    }
}

fn explicit_matrix(format: &str, nums: &[f64], dim: usize) -> Result<Vec<Vec<f64>>, ProblemError> {
    let mut d = vec![vec![0.0; dim]; dim];
    // (row, col) pairs in file order for each supported layout
    let cells: Vec<(usize, usize)> = match format {
        "FULL_MATRIX" => (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).collect(),
        "UPPER_ROW" => (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect(),
        "UPPER_DIAG_ROW" => (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect(),
        "LOWER_ROW" => (0..dim).flat_map(|i| (0..i).map(move |j| (i, j))).collect(),
        "LOWER_DIAG_ROW" => (0..dim).flat_map(|i| (0..=i).map(move |j| (i, j))).collect(),
        other => {
            return Err(ProblemError::Parse(format!(
                "unsupported EDGE_WEIGHT_FORMAT {other}"
            )))
        }
    };
    if nums.len() != cells.len() {
        return Err(ProblemError::Parse(format!(
            "EDGE_WEIGHT_SECTION has {} numbers, {format} needs {}",
            nums.len(),
            cells.len()
        )));
    }
    for (&(i, j), &w) in cells.iter().zip(nums) {
        d[i][j] = w;
        if format != "FULL_MATRIX" {
            d[j][i] = w;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euc_2d_uses_nearest_integer() {
        let text = "NAME : tri\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\n\
                    NODE_COORD_SECTION\n1 0 0\n2 3 4\n3 1 1\nEOF\n";
        let ProblemInstance::Tsp(t) = parse(text).unwrap() else { panic!() };
        assert_eq!(t.name, "tri");
        assert_eq!(t.dist[0][1], 5.0);
        // sqrt(2) = 1.414 -> 1
        assert_eq!(t.dist[0][2], 1.0);
        // sqrt(4 + 9) = 3.606 -> 4
        assert_eq!(t.dist[1][2], 4.0);
    }

    #[test]
    fn explicit_layouts_agree() {
        let full = "TYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\n\
                    EDGE_WEIGHT_SECTION\n0 1 2\n1 0 3\n2 3 0\nEOF";
        let upper = "TYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\n\
                     EDGE_WEIGHT_SECTION\n1 2\n3\nEOF";
        let lower = "TYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: LOWER_DIAG_ROW\n\
                     EDGE_WEIGHT_SECTION\n0\n1 0\n2 3 0\nEOF";
        let a = parse(full).unwrap();
        assert_eq!(a, parse(upper).unwrap());
        assert_eq!(a, parse(lower).unwrap());
    }

    #[test]
    fn cvrp_reorders_depot_and_reads_fleet() {
        let text = "NAME : P-n3-k2\nTYPE : CVRP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 10\n\
                    NODE_COORD_SECTION\n1 5 0\n2 0 0\n3 0 3\nDEMAND_SECTION\n1 4\n2 0\n3 6\n\
                    DEPOT_SECTION\n2\n-1\nEOF";
        let ProblemInstance::Vrp(v) = parse(text).unwrap() else { panic!() };
        assert_eq!(v.vehicles, 2);
        assert!(v.capacity.is_none());
        assert_eq!(v.dist[0][1], 5.0);
        assert_eq!(v.dist[0][2], 3.0);

        let ProblemInstance::Vrp(v) = parse_with(text, Options { with_capacity: true }).unwrap() else {
            panic!()
        };
        assert_eq!(v.capacity, Some(10.0));
        assert_eq!(v.demands, Some(vec![4.0, 6.0]));
    }

    #[test]
    fn rejects_unsupported_types() {
        assert!(parse("TYPE: ATSP\nDIMENSION: 2\nEOF").is_err());
        assert!(parse("TYPE: TSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: GEO\nEOF").is_err());
        assert!(parse("garbage line\n").is_err());
    }
}
