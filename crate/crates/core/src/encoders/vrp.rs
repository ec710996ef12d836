use super::{require_integral, slack_width, DecodedSolution, EncodeError, Encoding, NativeSolution, VarSlot};
use crate::problems::{ProblemInstance, ProblemKind, VrpInstance};
use crate::qubo::{QuboBuilder, QuboModel, Sample};

/// Multi-route position encoding.
///
/// `x[c][r][p] = 1` iff client `c` is the `p`-th stop of route `r`, with
/// `p < n_clients`. Constraints, all as quadratic penalties:
///
/// * every client appears exactly once (weight `A = (n_clients + 1) * max_dist + 1`);
/// * each `(route, position)` slot holds at most one client (weight `8 (A + max_dist)`);
/// * routes are contiguous: slot `p + 1` may only be used if slot `p` is (weight `A`);
/// * optionally, route load plus binary slack equals capacity (weight `A`).
///
/// The objective charges the depot departure leg at position 0, every arc
/// between consecutive slots, and the return leg from the last used slot.
/// Empty routes cost nothing.
pub fn encode_vrp(inst: &VrpInstance) -> Result<(QuboModel, Encoding), EncodeError> {
    inst.validate()
        .map_err(|e| EncodeError::Invalid(e.to_string()))?;
    let nc = inst.num_clients();
    let k = inst.vehicles;
    if k > nc {
        return Err(EncodeError::Infeasible(format!(
            "{k} vehicles for {nc} clients"
        )));
    }
    let layout = Layout::new(inst)?;
    let maxd = inst.max_distance();
    let one_hot = (nc + 1) as f64 * maxd + 1.0;
    let slot_weight = 8.0 * (one_hot + maxd);
    let contiguity = one_hot;
    let d = &inst.dist;

    let mut b = QuboBuilder::new(layout.num_vars());
    for c in 1..=nc {
        let terms: Vec<(usize, f64)> = (0..k)
            .flat_map(|r| (0..nc).map(move |p| (r, p)))
            .map(|(r, p)| (layout.visit(c, r, p), 1.0))
            .collect();
        b.add_squared_penalty(&terms, 1.0, one_hot);
    }
    for r in 0..k {
        for p in 0..nc {
            for c1 in 1..=nc {
                for c2 in c1 + 1..=nc {
                    b.add_quadratic(layout.visit(c1, r, p), layout.visit(c2, r, p), slot_weight);
                }
            }
        }
        for p in 0..nc - 1 {
            // occ(p+1) * (1 - occ(p))
            for c2 in 1..=nc {
                let next = layout.visit(c2, r, p + 1);
                b.add_linear(next, contiguity);
                for c1 in 1..=nc {
                    b.add_quadratic(layout.visit(c1, r, p), next, -contiguity);
                }
            }
        }
        for c in 1..=nc {
            b.add_linear(layout.visit(c, r, 0), d[0][c]);
        }
        for p in 0..nc - 1 {
            for c1 in 1..=nc {
                for c2 in 1..=nc {
                    if c1 != c2 && d[c1][c2] != 0.0 {
                        b.add_quadratic(layout.visit(c1, r, p), layout.visit(c2, r, p + 1), d[c1][c2]);
                    }
                }
            }
        }
        // return leg: x[c][r][p] * (1 - occ(p+1))
        for p in 0..nc {
            for c in 1..=nc {
                let here = layout.visit(c, r, p);
                b.add_linear(here, d[c][0]);
                if p + 1 < nc {
                    for u in 1..=nc {
                        b.add_quadratic(here, layout.visit(u, r, p + 1), -d[c][0]);
                    }
                }
            }
        }
    }
    if let Some(cap) = inst.capacity {
        for r in 0..k {
            let mut terms: Vec<(usize, f64)> = Vec::new();
            for c in 1..=nc {
                for p in 0..nc {
                    terms.push((layout.visit(c, r, p), inst.demand(c)));
                }
            }
            for bit in 0..layout.slack_bits {
                terms.push((layout.slack(r, bit), (1u64 << bit) as f64));
            }
            b.add_squared_penalty(&terms, cap, one_hot);
        }
    }

    let mut enc = Encoding::new(
        ProblemKind::Vrp,
        layout.slots(),
        ProblemInstance::Vrp(inst.clone()).fingerprint(),
    );
    enc.penalties.insert("one_hot".into(), one_hot);
    enc.penalties.insert("slot_at_most_one".into(), slot_weight);
    enc.penalties.insert("contiguity".into(), contiguity);
    if inst.has_capacity() {
        enc.penalties.insert("capacity".into(), one_hot);
    }
    Ok((b.build(), enc))
}

struct Layout {
    nc: usize,
    k: usize,
    slack_bits: usize,
}

impl Layout {
    fn new(inst: &VrpInstance) -> Result<Self, EncodeError> {
        let slack_bits = match (&inst.demands, inst.capacity) {
            (Some(demands), Some(cap)) => {
                require_integral(cap, "capacity")?;
                for &q in demands {
                    require_integral(q, "demand")?;
                }
                slack_width(cap)
            }
            _ => 0,
        };
        Ok(Layout {
            nc: inst.num_clients(),
            k: inst.vehicles,
            slack_bits,
        })
    }

    fn num_visit_vars(&self) -> usize {
        self.nc * self.k * self.nc
    }

    fn num_vars(&self) -> usize {
        self.num_visit_vars() + self.k * self.slack_bits
    }

    /// `client` is a 1-based node index.
    fn visit(&self, client: usize, route: usize, position: usize) -> usize {
        ((client - 1) * self.k + route) * self.nc + position
    }

    fn slack(&self, route: usize, bit: usize) -> usize {
        self.num_visit_vars() + route * self.slack_bits + bit
    }

    fn slots(&self) -> Vec<VarSlot> {
        let mut slots = Vec::with_capacity(self.num_vars());
        for client in 1..=self.nc {
            for route in 0..self.k {
                for position in 0..self.nc {
                    slots.push(VarSlot::VrpVisit { client, route, position });
                }
            }
        }
        for route in 0..self.k {
            for bit in 0..self.slack_bits {
                slots.push(VarSlot::VrpSlack { route, bit });
            }
        }
        slots
    }
}

pub fn decode_vrp(
    enc: &Encoding,
    sample: &Sample,
    inst: &VrpInstance,
) -> Result<DecodedSolution, EncodeError> {
    enc.check_kind(ProblemKind::Vrp)?;
    enc.check_sample(sample)?;
    let layout = Layout::new(inst)?;
    if layout.num_vars() != enc.num_variables() {
        return Err(EncodeError::DimensionMismatch {
            expected: layout.num_vars(),
            actual: enc.num_variables(),
        });
    }
    let (nc, k) = (layout.nc, layout.k);
    let mut count = vec![0usize; nc + 1];
    let mut routes = Vec::with_capacity(k);
    for r in 0..k {
        let mut route = Vec::new();
        let mut ended = false;
        for p in 0..nc {
            let here: Vec<usize> = (1..=nc)
                .filter(|&c| sample.get(layout.visit(c, r, p)) == 1)
                .collect();
            match here.as_slice() {
                [] => ended = true,
                [c] if !ended => {
                    count[*c] += 1;
                    route.push(*c);
                }
                _ => return Ok(DecodedSolution::infeasible()),
            }
        }
        if let Some(cap) = inst.capacity {
            let load: f64 = route.iter().map(|&c| inst.demand(c)).sum();
            let slack: f64 = (0..layout.slack_bits)
                .filter(|&bit| sample.get(layout.slack(r, bit)) == 1)
                .map(|bit| (1u64 << bit) as f64)
                .sum();
            if load + slack != cap {
                return Ok(DecodedSolution::infeasible());
            }
        }
        routes.push(route);
    }
    if count[1..].iter().any(|&c| c != 1) {
        return Ok(DecodedSolution::infeasible());
    }
    Ok(match inst.solution_length(&routes) {
        Some(len) => DecodedSolution::feasible(NativeSolution::Routes(routes), len),
        None => DecodedSolution::infeasible(),
    })
}

/// Sample representing `routes` (client node indices per vehicle, at most
/// `vehicles` routes). Capacity slack is set to `capacity - load`.
pub fn vrp_sample(enc: &Encoding, inst: &VrpInstance, routes: &[Vec<usize>]) -> Sample {
    let mut s = Sample::zeros(enc.num_variables());
    for (route, clients) in routes.iter().enumerate() {
        for (position, &client) in clients.iter().enumerate() {
            let var = enc
                .var(VarSlot::VrpVisit { client, route, position })
                .expect("client slot within encoding");
            s.set(var, true);
        }
    }
    if let Some(cap) = inst.capacity {
        for route in 0..inst.vehicles {
            let load: f64 = routes
                .get(route)
                .map_or(0.0, |r| r.iter().map(|&c| inst.demand(c)).sum());
            let slack = (cap - load).max(0.0) as u64;
            let mut bit = 0;
            while let Some(var) = enc.var(VarSlot::VrpSlack { route, bit }) {
                s.set(var, (slack >> bit) & 1 == 1);
                bit += 1;
            }
        }
    }
    s
}
