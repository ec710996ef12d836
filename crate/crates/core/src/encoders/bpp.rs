use super::{require_integral, slack_width, DecodedSolution, EncodeError, Encoding, NativeSolution, VarSlot};
use crate::problems::{BppInstance, ProblemInstance, ProblemKind};
use crate::qubo::{QuboBuilder, QuboModel, Sample};

/// Bin-usage encoding: `y[b]` opens bin `b`, `x[i][b]` places item `i` in it,
/// and `s[b][t]` are the binary slack digits of bin `b`'s capacity row
/// `sum_i w_i x[i][b] + sum_t 2^t s[b][t] = C y[b]`. The objective is
/// `sum_b y[b]`. Weights and capacity must be integral.
///
/// Variable order: all `y`, then `x` item-major, then slack bin-major.
pub fn encode_bpp(inst: &BppInstance) -> Result<(QuboModel, Encoding), EncodeError> {
    inst.validate()
        .map_err(|e| EncodeError::Invalid(e.to_string()))?;
    let layout = Layout::new(inst)?;
    let penalty = inst.max_bins as f64 + 1.0;

    let mut b = QuboBuilder::new(layout.num_vars());
    for bin in 0..layout.bins {
        b.add_linear(layout.used(bin), 1.0);
    }
    for item in 0..layout.items {
        let terms: Vec<(usize, f64)> = (0..layout.bins).map(|bin| (layout.assign(item, bin), 1.0)).collect();
        b.add_squared_penalty(&terms, 1.0, penalty);
    }
    for bin in 0..layout.bins {
        let mut terms: Vec<(usize, f64)> = (0..layout.items)
            .map(|item| (layout.assign(item, bin), inst.weights[item]))
            .collect();
        terms.extend((0..layout.slack_bits).map(|t| (layout.slack(bin, t), (1u64 << t) as f64)));
        terms.push((layout.used(bin), -inst.capacity));
        b.add_squared_penalty(&terms, 0.0, penalty);
    }

    let mut enc = Encoding::new(
        ProblemKind::Bpp,
        layout.slots(),
        ProblemInstance::Bpp(inst.clone()).fingerprint(),
    );
    enc.penalties.insert("one_hot".into(), penalty);
    enc.penalties.insert("capacity".into(), penalty);
    Ok((b.build(), enc))
}

struct Layout {
    bins: usize,
    items: usize,
    slack_bits: usize,
}

impl Layout {
    fn new(inst: &BppInstance) -> Result<Self, EncodeError> {
        require_integral(inst.capacity, "capacity")?;
        for &w in &inst.weights {
            require_integral(w, "weight")?;
        }
        Ok(Layout {
            bins: inst.max_bins,
            items: inst.num_items(),
            slack_bits: slack_width(inst.capacity),
        })
    }

    fn num_vars(&self) -> usize {
        self.bins * (1 + self.items + self.slack_bits)
    }

    fn used(&self, bin: usize) -> usize {
        bin
    }

    fn assign(&self, item: usize, bin: usize) -> usize {
        self.bins + item * self.bins + bin
    }

    fn slack(&self, bin: usize, bit: usize) -> usize {
        self.bins * (1 + self.items) + bin * self.slack_bits + bit
    }

    fn slots(&self) -> Vec<VarSlot> {
        let mut slots: Vec<VarSlot> = (0..self.bins).map(|bin| VarSlot::BinUsed { bin }).collect();
        for item in 0..self.items {
            slots.extend((0..self.bins).map(|bin| VarSlot::ItemInBin { item, bin }));
        }
        for bin in 0..self.bins {
            slots.extend((0..self.slack_bits).map(|bit| VarSlot::BinSlack { bin, bit }));
        }
        slots
    }
}

/// Feasible iff every item is in exactly one bin, every capacity row holds
/// exactly (including slack), and exactly the non-empty bins are open.
pub fn decode_bpp(
    enc: &Encoding,
    sample: &Sample,
    inst: &BppInstance,
) -> Result<DecodedSolution, EncodeError> {
    enc.check_kind(ProblemKind::Bpp)?;
    enc.check_sample(sample)?;
    let layout = Layout::new(inst)?;
    if layout.num_vars() != enc.num_variables() {
        return Err(EncodeError::DimensionMismatch {
            expected: layout.num_vars(),
            actual: enc.num_variables(),
        });
    }
    let mut assignment = Vec::with_capacity(layout.items);
    for item in 0..layout.items {
        let mut bins = (0..layout.bins).filter(|&bin| sample.get(layout.assign(item, bin)) == 1);
        match (bins.next(), bins.next()) {
            (Some(bin), None) => assignment.push(bin),
            _ => return Ok(DecodedSolution::infeasible()),
        }
    }
    for bin in 0..layout.bins {
        let load: f64 = (0..layout.items)
            .filter(|&i| assignment[i] == bin)
            .map(|i| inst.weights[i])
            .sum();
        let slack: f64 = (0..layout.slack_bits)
            .filter(|&t| sample.get(layout.slack(bin, t)) == 1)
            .map(|t| (1u64 << t) as f64)
            .sum();
        let open = sample.get(layout.used(bin)) == 1;
        let row_holds = load + slack == if open { inst.capacity } else { 0.0 };
        if !row_holds || open != (load > 0.0) {
            return Ok(DecodedSolution::infeasible());
        }
    }
    Ok(match inst.bins_used(&assignment) {
        Some(bins) => DecodedSolution::feasible(NativeSolution::Bins(assignment), bins),
        None => DecodedSolution::infeasible(),
    })
}

/// Sample for an item-to-bin assignment: non-empty bins open, slack filled.
pub fn bpp_sample(enc: &Encoding, inst: &BppInstance, assignment: &[usize]) -> Sample {
    let mut s = Sample::zeros(enc.num_variables());
    let mut load = vec![0.0; inst.max_bins];
    for (item, &bin) in assignment.iter().enumerate() {
        s.set(enc.var(VarSlot::ItemInBin { item, bin }).expect("bin in range"), true);
        load[bin] += inst.weights[item];
    }
    for (bin, &l) in load.iter().enumerate() {
        if l > 0.0 {
            s.set(enc.var(VarSlot::BinUsed { bin }).unwrap(), true);
            let slack = (inst.capacity - l).max(0.0) as u64;
            let mut bit = 0;
            while let Some(var) = enc.var(VarSlot::BinSlack { bin, bit }) {
                s.set(var, (slack >> bit) & 1 == 1);
                bit += 1;
            }
        }
    }
    s
}
