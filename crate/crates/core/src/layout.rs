//! Nearest-neighbor routing on a line with SWAP chains and RESTART ancilla recycling.

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::exec::PackedState;
use crate::fault::trial_rng;
use crate::gadgets::{measure_spread, Gadget, SpreadOptions};
use crate::par;
use crate::state::{reduced_trace_distance, SparseState, C64};
use rand::Rng;
use serde::Serialize;

/// Slot ids placed on line positions: `order[pos]` is the slot at `pos`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearLayout {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl LinearLayout {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut pos = vec![usize::MAX; order.len()];
        for (p, &s) in order.iter().enumerate() {
            if s >= order.len() || pos[s] != usize::MAX {
                return Err(Error::BadParams("layout must be a permutation of 0..n".into()));
            }
            pos[s] = p;
        }
        Ok(Self { order, pos })
    }

    pub fn identity(n: usize) -> Self {
        Self { order: (0..n).collect(), pos: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, slot: usize) -> usize {
        self.pos[slot]
    }

    pub fn slot_at(&self, pos: usize) -> usize {
        self.order[pos]
    }
}

/// Line slot of every source wire. Inputs take slots 0..inputs; each added wire takes the lowest
/// slot freed by an earlier discard, or a new one.
pub fn assign_slots(c: &Circuit) -> (Vec<usize>, usize) {
    let mut slot = vec![usize::MAX; c.wires()];
    for (w, s) in slot.iter_mut().enumerate().take(c.inputs()) {
        *s = w;
    }
    let mut n = c.inputs();
    let mut free: std::collections::BTreeSet<usize> = Default::default();
    for g in c.gates() {
        let w = g.target(0);
        match g.kind {
            GateKind::AddBlank => {
                slot[w] = free.pop_first().unwrap_or_else(|| {
                    n += 1;
                    n - 1
                });
            }
            GateKind::Discard => {
                free.insert(slot[w]);
            }
            _ => {}
        }
    }
    (slot, n)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoutedCircuit {
    /// Wire s is the qupit at position `layout.position(s)`. Wires past the inputs are added
    /// blank at the start and never discarded.
    #[serde(skip)]
    pub circuit: Circuit,
    pub layout: LinearLayout,
    /// Routed wire holding each source wire.
    pub slot_of: Vec<usize>,
    /// Routed wires holding the source's live outputs, in ascending source order.
    pub outputs: Vec<usize>,
    /// SWAPs inserted for each source gate, in source order (adds and discards included, as 0).
    pub swaps_per_gate: Vec<usize>,
    pub swaps: usize,
    pub restarts: usize,
}

/// Routes `c` to a line: for a gate whose operands are not adjacent, the farther operands move
/// next to an anchor (the lower one for two operands, the middle one for three), the gate acts,
/// and the moves are undone. A wire added into a slot used before becomes a RESTART there;
/// discards only free the slot.
pub fn route_1d(c: &Circuit, layout: &LinearLayout) -> Result<RoutedCircuit> {
    let (slot_of, n) = assign_slots(c);
    if layout.len() != n {
        return Err(Error::BadParams(format!("layout has {} positions, circuit needs {n}", layout.len())));
    }
    let mut out = Circuit::new(c.p(), c.inputs());
    out.add_n(n - c.inputs());
    let mut used = vec![false; n];
    used[..c.inputs()].fill(true);
    let mut swaps_per_gate = Vec::with_capacity(c.len());
    let (mut swaps, mut restarts) = (0, 0);
    for g in c.gates() {
        let ar = g.kind.arity();
        if ar > 3 {
            return Err(Error::ArityTooHigh(ar));
        }
        let mut moved = 0;
        match g.kind {
            GateKind::AddBlank => {
                let s = slot_of[g.target(0)];
                if used[s] {
                    out.try_push(GateKind::Restart, &[s])?;
                    restarts += 1;
                }
                used[s] = true;
            }
            GateKind::Discard => {}
            _ => {
                let pos: Vec<usize> = g.targets().map(|w| layout.position(slot_of[w])).collect();
                let mut sorted = pos.clone();
                sorted.sort_unstable();
                let anchor = if ar == 3 { sorted[1] } else { sorted[0] };
                let anchor_rank = if ar == 3 { 1 } else { 0 };
                // Content at position -> position it now sits at.
                let mut cur = pos.clone();
                let mut chain: Vec<(usize, usize)> = Vec::new();
                for (rank, &from) in sorted.iter().enumerate() {
                    let to = anchor + rank - anchor_rank;
                    let mut at = from;
                    while at != to {
                        let next = if at > to { at - 1 } else { at + 1 };
                        chain.push((at.min(next), at.max(next)));
                        at = next;
                    }
                    for q in cur.iter_mut().filter(|q| **q == from) {
                        *q = to;
                    }
                }
                for &(a, b) in &chain {
                    out.try_push(GateKind::Swap, &[layout.slot_at(a), layout.slot_at(b)])?;
                }
                let targets: Vec<usize> = cur.iter().map(|&q| layout.slot_at(q)).collect();
                out.try_push(g.kind, &targets)?;
                for &(a, b) in chain.iter().rev() {
                    out.try_push(GateKind::Swap, &[layout.slot_at(a), layout.slot_at(b)])?;
                }
                moved = 2 * chain.len();
            }
        }
        swaps += moved;
        swaps_per_gate.push(moved);
    }
    let outputs = c.live_wires().iter().map(|&w| slot_of[w]).collect();
    Ok(RoutedCircuit { circuit: out, layout: layout.clone(), slot_of, outputs, swaps_per_gate, swaps, restarts })
}

/// Every gate of `c` touches consecutive line positions under `layout`; returns the first
/// offending gate index otherwise.
pub fn check_adjacent(c: &Circuit, layout: &LinearLayout) -> std::result::Result<(), usize> {
    for (i, g) in c.gates().iter().enumerate() {
        let mut pos: Vec<usize> = g.targets().map(|w| layout.position(w)).collect();
        pos.sort_unstable();
        if pos.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(i);
        }
    }
    Ok(())
}

fn random_state(p: u32, n: usize, rng: &mut impl Rng) -> SparseState {
    let total = (p as usize).pow(n as u32);
    let mut st = SparseState::from_terms(
        p,
        n,
        (0..total).map(|mut i| {
            let mut d = vec![0u8; n];
            for x in d.iter_mut().rev() {
                *x = (i % p as usize) as u8;
                i /= p as usize;
            }
            (d, C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        }),
    );
    st.normalize();
    st
}

/// Runs both circuits on `samples` random input states and checks that the routed outputs match
/// the original ones. Mixed outputs are compared by trace distance T, accepted when
/// T < 5e-10 so that the fidelity exceeds 1 - 1e-9.
pub fn verify_equivalence(original: &Circuit, routed: &RoutedCircuit, samples: usize, seed: u64) -> Result<bool> {
    let n = routed.circuit.wires();
    let p = original.p();
    if n > 12 || (p as f64).powi(original.inputs() as i32) > 65536.0 {
        return Err(Error::TooLarge(format!("{n} qupits exceeds the dense limit of 12")));
    }
    let src_out = original.live_wires();
    if src_out.len() != routed.outputs.len() || routed.circuit.inputs() != original.inputs() {
        return Ok(false);
    }
    let oks: Vec<Result<bool>> = par::map_range(samples, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let input = random_state(p, original.inputs(), &mut rng);
        let mut a = PackedState::new(&input)?;
        a.run(original)?;
        let mut b = PackedState::new(&input)?;
        b.run(&routed.circuit)?;
        if let (Ok(x), Ok(y)) = (a.pure_state(&src_out), b.pure_state(&routed.outputs)) {
            return Ok(x.fidelity(&y) > 1.0 - 1e-9);
        }
        let (x, _) = a.purified(&src_out);
        let (y, _) = b.purified(&routed.outputs);
        let keep: Vec<usize> = (0..src_out.len()).collect();
        Ok(reduced_trace_distance(&x, &keep, &y, &keep) < 5e-10)
    });
    for ok in oks {
        if !ok? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoutedSpread {
    pub gadget: String,
    pub unrouted: usize,
    pub routed: usize,
    /// routed / unrouted, or 1 when neither spreads.
    pub factor: f64,
    pub swaps: usize,
}

/// The gadget with its circuit routed on the given line (identity layout when None).
pub fn route_gadget(g: &Gadget, layout: Option<&LinearLayout>) -> Result<(Gadget, RoutedCircuit)> {
    let (_, n) = assign_slots(&g.circuit);
    let id = LinearLayout::identity(n);
    let r = route_1d(&g.circuit, layout.unwrap_or(&id))?;
    let map = |blocks: &[Vec<usize>]| -> Vec<Vec<usize>> { blocks.iter().map(|b| b.iter().map(|&w| r.slot_of[w]).collect()).collect() };
    let routed = Gadget {
        name: format!("{} routed", g.name),
        set: g.set,
        circuit: r.circuit.clone(),
        inputs: map(&g.inputs),
        input_specs: g.input_specs.clone(),
        outputs: map(&g.outputs),
        output_specs: g.output_specs.clone(),
    };
    Ok((routed, r))
}

/// Spread of the gadget before and after routing on the identity line.
pub fn routed_spread_factor(g: &Gadget, opts: &SpreadOptions) -> Result<RoutedSpread> {
    let before = measure_spread(g, opts)?;
    let (rg, r) = route_gadget(g, None)?;
    let after = measure_spread(&rg, opts)?;
    let factor = if before.l == 0 { if after.l == 0 { 1.0 } else { f64::INFINITY } } else { after.l as f64 / before.l as f64 };
    Ok(RoutedSpread { gadget: g.name.clone(), unrouted: before.l, routed: after.l, factor, swaps: r.swaps })
}

/// Copy of `c` without its i-th gate, for negative controls. Adds cannot be dropped.
pub fn drop_gate(c: &Circuit, i: usize) -> Result<Circuit> {
    if c.gates().get(i).is_some_and(|g| g.kind == GateKind::AddBlank) {
        return Err(Error::BadParams("cannot drop an add".into()));
    }
    let mut out = Circuit::new(c.p(), c.inputs());
    for (j, g) in c.gates().iter().enumerate() {
        if j == i {
            continue;
        }
        if g.kind == GateKind::AddBlank {
            out.add();
        } else {
            out.try_push(g.kind, &g.target_vec())?;
        }
    }
    Ok(out)
}
