//! Exhaustive native solvers for desk-scale instances.
//!
//! These enumerate permutations, route splits, bin assignments and
//! partitions directly on the native problem and never build a QUBO.

use super::{BppInstance, McpInstance, TspInstance, VrpInstance};

/// Calls `visit` with every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Shortest closed tour and its length. Node 0 is fixed first.
pub fn tsp_optimum(inst: &TspInstance) -> (Vec<usize>, f64) {
    let n = inst.num_nodes();
    if n <= 1 {
        return ((0..n).collect(), 0.0);
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = (Vec::new(), f64::INFINITY);
    let mut tour = vec![0; n];
    for_each_permutation(&mut rest, &mut |perm| {
        tour[1..].copy_from_slice(perm);
        let len = inst.tour_length(&tour).expect("permutation");
        if len < best.1 {
            best = (tour.clone(), len);
        }
    });
    best
}

/// Minimum total route length over every client order split into at most
/// `vehicles` non-empty routes (respecting capacity when present).
pub fn vrp_optimum(inst: &VrpInstance) -> Option<(Vec<Vec<usize>>, f64)> {
    let n = inst.num_clients();
    let mut clients: Vec<usize> = (1..=n).collect();
    let mut best: Option<(Vec<Vec<usize>>, f64)> = None;
    for_each_permutation(&mut clients, &mut |perm| {
        // A split is a set of cut points between consecutive clients.
        for cuts in 0u32..(1u32 << n.saturating_sub(1)) {
            if cuts.count_ones() as usize + 1 > inst.vehicles {
                continue;
            }
            let mut routes = vec![Vec::new()];
            for (k, &c) in perm.iter().enumerate() {
                if k > 0 && (cuts >> (k - 1)) & 1 == 1 {
                    routes.push(Vec::new());
                }
                routes.last_mut().unwrap().push(c);
            }
            if let Some(len) = inst.solution_length(&routes) {
                if best.as_ref().map_or(true, |b| len < b.1) {
                    best = Some((routes, len));
                }
            }
        }
    });
    best
}

/// Minimum number of non-empty bins, with the item-to-bin assignment.
/// Returns `None` if the items cannot fit into `max_bins` bins.
pub fn bpp_optimum(inst: &BppInstance) -> Option<(Vec<usize>, f64)> {
    fn search(
        inst: &BppInstance,
        item: usize,
        used: usize,
        load: &mut Vec<f64>,
        assign: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        if best.as_ref().map_or(false, |b| used as f64 >= b.1) {
            return;
        }
        if item == inst.num_items() {
            *best = Some((assign.clone(), used as f64));
            return;
        }
        // Bins are interchangeable: an item may only open the next new bin.
        for bin in 0..(used + 1).min(inst.max_bins) {
            if load[bin] + inst.weights[item] <= inst.capacity + 1e-9 {
                load[bin] += inst.weights[item];
                assign.push(bin);
                search(inst, item + 1, used.max(bin + 1), load, assign, best);
                assign.pop();
                load[bin] -= inst.weights[item];
            }
        }
    }
    let mut best = None;
    search(
        inst,
        0,
        0,
        &mut vec![0.0; inst.max_bins],
        &mut Vec::new(),
        &mut best,
    );
    best
}

/// Maximum cut weight and one maximizing partition (node 0 on side 0).
pub fn mcp_optimum(inst: &McpInstance) -> (Vec<u8>, f64) {
    let n = inst.n;
    let mut best = (vec![0u8; n], inst.cut_value(&vec![0u8; n]));
    if n == 0 {
        return best;
    }
    let mut side = vec![0u8; n];
    for mask in 0u64..(1u64 << (n - 1)) {
        for (k, s) in side.iter_mut().enumerate().skip(1) {
            *s = ((mask >> (k - 1)) & 1) as u8;
        }
        let cut = inst.cut_value(&side);
        if cut > best.1 {
            best = (side.clone(), cut);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count() {
        let mut items: Vec<usize> = (0..5).collect();
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(&mut items, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn tsp_square_with_heavy_diagonals() {
        let d = vec![
            vec![0.0, 1.0, 10.0, 1.0],
            vec![1.0, 0.0, 1.0, 10.0],
            vec![10.0, 1.0, 0.0, 1.0],
            vec![1.0, 10.0, 1.0, 0.0],
        ];
        let (_, len) = tsp_optimum(&TspInstance::new("sq", d).unwrap());
        assert_eq!(len, 4.0);
    }

    #[test]
    fn vrp_single_vehicle_is_depot_tour() {
        let d = vec![
            vec![0.0, 2.0, 3.0, 4.0],
            vec![2.0, 0.0, 1.0, 5.0],
            vec![3.0, 1.0, 0.0, 2.0],
            vec![4.0, 5.0, 2.0, 0.0],
        ];
        let v = VrpInstance {
            name: "v".into(),
            dist: d.clone(),
            vehicles: 1,
            demands: None,
            capacity: None,
        };
        let (_, len) = vrp_optimum(&v).unwrap();
        let (_, tour) = tsp_optimum(&TspInstance::new("t", d).unwrap());
        assert_eq!(len, tour);
        assert_eq!(len, 9.0);
    }

    #[test]
    fn bpp_four_sixes() {
        let b = BppInstance {
            name: "b".into(),
            weights: vec![6.0; 4],
            capacity: 10.0,
            max_bins: 4,
        };
        assert_eq!(bpp_optimum(&b).unwrap().1, 4.0);
        let fits = BppInstance {
            weights: vec![1.0; 3],
            max_bins: 3,
            ..b.clone()
        };
        assert_eq!(bpp_optimum(&fits).unwrap().1, 1.0);
        let short = BppInstance { max_bins: 3, ..b };
        assert!(bpp_optimum(&short).is_none());
    }

    #[test]
    fn mcp_triangle_and_single_edge() {
        let tri = McpInstance {
            name: "k3".into(),
            n: 3,
            edges: vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)],
        };
        assert_eq!(mcp_optimum(&tri).1, 2.0);
        let edge = McpInstance {
            name: "e".into(),
            n: 2,
            edges: vec![(0, 1, 5.0)],
        };
        assert_eq!(mcp_optimum(&edge).1, 5.0);
    }
}
