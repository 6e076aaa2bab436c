//! The recursive simulation map: each gate of a circuit becomes an error-correction stage on its
//! blocks followed by the gate's procedure, working period by working period.

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::fault::{locations, Location, PauliFrame, RectangleTree};
use crate::gadgets::{
    decode_gadget, ec_gadget, encode_gadget, fourier_gadget, gate_set_for, prepare_s0, prepare_s0_poly, toffoli_gadget_poly,
    transversal_gadget, Gadget,
};
use crate::par;
use crate::qcode::{CodeKind, QuantumCode};
use rustc_hash::FxHashMap;
use serde::Serialize;
use std::ops::Range;
use std::sync::Arc;

/// How the error-correction stage of each working period is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EcMode {
    /// Explicit EC gadgets in the circuit.
    Gadget,
    /// No EC gates; checkers treat every period start as a perfect correction.
    Ideal,
    /// No EC stage at all.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompileOptions {
    pub ec: EcMode,
    /// Prepend encoding and append decoding gadgets.
    pub boundary: bool,
    /// Largest compiled circuit, in locations.
    pub max_locations: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { ec: EcMode::Gadget, boundary: true, max_locations: 10_000_000 }
    }
}

/// Level range of the compiled circuit simulating one source time step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Period {
    /// Source step; None for the encoding and decoding stages.
    pub step: Option<usize>,
    pub levels: Range<usize>,
    /// Block wires of each source qupit at the end of the period (empty when not live).
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SimulatedCircuit {
    pub circuit: Circuit,
    pub level: usize,
    pub code: Arc<QuantumCode>,
    pub options: CompileOptions,
    /// Compiled input wires of each original input qupit.
    pub inputs: Vec<Vec<usize>>,
    /// Compiled output wires of each original qupit live at the end (original wire order).
    pub outputs: Vec<Vec<usize>>,
    /// Working periods of the last simulation step.
    pub periods: Vec<Period>,
    /// Locations of the compiled circuit.
    pub locations: Vec<Location>,
    /// For each location, the location of the previous level it descends from (None for
    /// encoding and decoding stages).
    pub origin: Vec<Option<usize>>,
    /// Locations of the previous level.
    pub source_locations: Vec<Location>,
    pub tree: RectangleTree,
}

impl SimulatedCircuit {
    /// Locations outside every rectangle (encoding and decoding stages).
    pub fn boundary_locations(&self) -> usize {
        self.locations.len() - self.tree.leaf_count()
    }

    /// Compiled locations of each previous-level location.
    pub fn rectangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.source_locations.len()];
        for (i, o) in self.origin.iter().enumerate() {
            if let Some(o) = o {
                out[*o].push(i);
            }
        }
        out
    }
}

struct Procedures<'a> {
    code: &'a QuantumCode,
    cache: FxHashMap<GateKind, Vec<Gadget>>,
    ec: Option<Gadget>,
}

impl<'a> Procedures<'a> {
    fn new(code: &'a QuantumCode, mode: EcMode) -> Result<Self> {
        let ec = if mode == EcMode::Gadget { Some(ec_gadget(code)?) } else { None };
        Ok(Self { code, cache: FxHashMap::default(), ec })
    }

    /// Gadgets applied in sequence for one source gate.
    fn gate(&mut self, kind: GateKind) -> Result<&[Gadget]> {
        if !self.cache.contains_key(&kind) {
            let code = self.code;
            let seq = match (code.kind(), kind) {
                (CodeKind::Polynomial, GateKind::Fourier(1)) => vec![fourier_gadget(code)?],
                (CodeKind::Polynomial, GateKind::Fourier(r)) => vec![transversal_gadget(code, GateKind::Mul(r))?, fourier_gadget(code)?],
                (CodeKind::Polynomial, GateKind::GenToffoli) => vec![toffoli_gadget_poly(code)?],
                (_, GateKind::Toffoli | GateKind::GenToffoli) => {
                    return Err(Error::Unsupported(format!("no Toffoli procedure for {:?} codes", code.kind())))
                }
                _ => vec![transversal_gadget(code, kind)?],
            };
            self.cache.insert(kind, seq);
        }
        Ok(&self.cache[&kind])
    }
}

struct Builder {
    c: Circuit,
    tags: Vec<Option<usize>>,
    /// Owner of wires created inside a procedure.
    born: Vec<Option<usize>>,
    /// (first period, source qupit) from which a wire is a data wire.
    data_from: Vec<Option<(usize, usize)>>,
    max: usize,
}

impl Builder {
    fn sync(&mut self, tag: Option<usize>) -> Result<()> {
        self.tags.resize(self.c.len(), tag);
        self.born.resize(self.c.wires(), tag);
        self.data_from.resize(self.c.wires(), None);
        if self.c.len() > self.max {
            return Err(Error::TooLarge(format!("compiled circuit exceeds {} locations", self.max)));
        }
        Ok(())
    }

    /// Appends `g` with its input blocks bound to `blocks`; returns its output blocks.
    fn apply(&mut self, g: &Gadget, blocks: &[&[usize]], tag: Option<usize>) -> Result<Vec<Vec<usize>>> {
        let mut ins = vec![usize::MAX; g.circuit.inputs()];
        for (gi, b) in g.inputs.iter().zip(blocks) {
            for (&w, &x) in gi.iter().zip(b.iter()) {
                ins[w] = x;
            }
        }
        let map = self.c.append(&g.circuit, &ins);
        self.sync(tag)?;
        Ok(g.outputs.iter().map(|o| o.iter().map(|&w| map[w]).collect()).collect())
    }

    fn prepare(&mut self, code: &QuantumCode, tag: Option<usize>) -> Result<Vec<usize>> {
        let b = match code.kind() {
            CodeKind::Polynomial => prepare_s0_poly(&mut self.c, code)?,
            _ => prepare_s0(&mut self.c, code)?,
        };
        self.sync(tag)?;
        Ok(b)
    }

    fn set_data(&mut self, wires: &[usize], period: usize, q: usize) {
        for &w in wires {
            if self.data_from[w].is_none() {
                self.data_from[w] = Some((period, q));
            }
        }
    }
}

/// Result of one application of the simulation map.
struct Level {
    circuit: Circuit,
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
    periods: Vec<Period>,
    locations: Vec<Location>,
    origin: Vec<Option<usize>>,
    source_locations: Vec<Location>,
}

fn phi(src: &Circuit, code: &QuantumCode, opts: &CompileOptions) -> Result<Level> {
    src.check_gate_set(gate_set_for(code))?;
    if src.p() != code.p() {
        return Err(Error::FieldMismatch);
    }
    let m = code.m();
    let src_locs = locations(src);
    let mut at: FxHashMap<(usize, usize), usize> = FxHashMap::default();
    for (i, l) in src_locs.iter().enumerate() {
        for &q in &l.qupits {
            at.insert((q, l.time), i);
        }
    }
    let mut procs = Procedures::new(code, opts.ec)?;
    let n_in = src.inputs();
    let mut b = Builder { c: Circuit::new(code.p(), n_in * m), tags: Vec::new(), born: Vec::new(), data_from: Vec::new(), max: opts.max_locations };
    b.sync(None)?;
    let inputs: Vec<Vec<usize>> = (0..n_in).map(|q| (q * m..(q + 1) * m).collect()).collect();
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); src.wires()];
    let mut periods: Vec<Period> = Vec::new();
    let mut start = 0;
    let mut close = |b: &mut Builder, periods: &mut Vec<Period>, step: Option<usize>, blocks: &[Vec<usize>]| {
        b.c.barrier();
        periods.push(Period { step, levels: start..b.c.depth(), blocks: blocks.to_vec() });
        start = b.c.depth();
    };

    if opts.boundary {
        let enc = encode_gadget(code)?;
        for q in 0..n_in {
            blocks[q] = b.apply(&enc, &[&inputs[q]], None)?.remove(0);
            b.set_data(&blocks[q].clone(), 1, q);
            // The raw copies only held the classical input digit.
            b.c.discard_all(&inputs[q]);
            b.sync(None)?;
        }
        close(&mut b, &mut periods, None, &blocks);
    } else {
        for q in 0..n_in {
            blocks[q] = inputs[q].clone();
            b.set_data(&inputs[q], 0, q);
        }
    }

    let mut by_step: Vec<Vec<usize>> = vec![Vec::new(); src.depth()];
    for (i, l) in src_locs.iter().enumerate() {
        by_step[l.time].push(i);
    }
    for (s, locs) in by_step.iter().enumerate() {
        let pidx = periods.len();
        for &li in locs {
            let l = &src_locs[li];
            let tag = Some(li);
            let kind = l.gate.map(|g| src.gates()[g].kind);
            match kind {
                Some(GateKind::AddBlank) => {
                    blocks[l.qupits[0]] = b.prepare(code, tag)?;
                }
                Some(GateKind::Discard) => {
                    b.c.discard_all(&blocks[l.qupits[0]]);
                    b.sync(tag)?;
                    blocks[l.qupits[0]].clear();
                }
                Some(GateKind::Restart) => {
                    b.c.discard_all(&blocks[l.qupits[0]]);
                    b.sync(tag)?;
                    blocks[l.qupits[0]] = b.prepare(code, tag)?;
                }
                _ => {
                    if let Some(ec) = &procs.ec {
                        let ec = ec.clone();
                        for &q in &l.qupits {
                            blocks[q] = b.apply(&ec, &[&blocks[q]], tag)?.remove(0);
                        }
                    }
                    if let Some(kind) = kind {
                        for g in procs.gate(kind)?.to_vec() {
                            let ins: Vec<&[usize]> = l.qupits.iter().map(|&q| blocks[q].as_slice()).collect();
                            let outs = b.apply(&g, &ins, tag)?;
                            for (&q, o) in l.qupits.iter().zip(outs) {
                                blocks[q] = o;
                            }
                        }
                    }
                }
            }
            for &q in &l.qupits {
                let w = blocks[q].clone();
                b.set_data(&w, pidx + 1, q);
            }
        }
        close(&mut b, &mut periods, Some(s), &blocks);
    }

    let live: Vec<usize> = src.live_wires();
    let outputs: Vec<Vec<usize>> = if opts.boundary {
        let dec = decode_gadget(code)?;
        let mut outs = Vec::new();
        for &q in &live {
            outs.push(b.apply(&dec, &[&blocks[q]], None)?.remove(0));
        }
        close(&mut b, &mut periods, None, &blocks);
        outs
    } else {
        live.iter().map(|&q| blocks[q].clone()).collect()
    };

    let locs = locations(&b.c);
    if locs.len() > opts.max_locations {
        return Err(Error::TooLarge(format!("compiled circuit has {} locations", locs.len())));
    }
    let mut period_of = vec![0; b.c.depth()];
    for (pi, p) in periods.iter().enumerate() {
        for t in p.levels.clone() {
            period_of[t] = pi;
        }
    }
    let origin = locs
        .iter()
        .map(|l| match l.gate {
            Some(g) => b.tags[g],
            None => {
                let w = l.qupits[0];
                let pi = period_of[l.time];
                match (b.data_from[w], periods[pi].step) {
                    (Some((p0, q)), Some(step)) if pi >= p0 => at.get(&(q, step)).copied(),
                    (Some((p0, _)), None) if pi >= p0 => None,
                    _ => b.born[w],
                }
            }
        })
        .collect();
    Ok(Level { circuit: b.c, inputs, outputs, periods, locations: locs, origin, source_locations: src_locs })
}

fn children(origin: &[Option<usize>], n_src: usize) -> Vec<Vec<usize>> {
    let mut ch = vec![Vec::new(); n_src];
    for (i, o) in origin.iter().enumerate() {
        if let Some(o) = o {
            ch[*o].push(i);
        }
    }
    ch
}

/// One application of the simulation map.
pub fn simulate_level(circuit: &Circuit, code: &QuantumCode, opts: &CompileOptions) -> Result<SimulatedCircuit> {
    simulate_r(circuit, code, 1, opts)
}

/// r-fold application with the rectangle tree of every level; r = 0 returns the input.
pub fn simulate_r(circuit: &Circuit, code: &QuantumCode, r: usize, opts: &CompileOptions) -> Result<SimulatedCircuit> {
    let locs = locations(circuit);
    let n = locs.len();
    let mut sim = SimulatedCircuit {
        circuit: circuit.clone(),
        level: 0,
        code: Arc::new(code.clone()),
        options: *opts,
        inputs: (0..circuit.inputs()).map(|q| vec![q]).collect(),
        outputs: circuit.live_wires().into_iter().map(|q| vec![q]).collect(),
        periods: Vec::new(),
        origin: (0..n).map(Some).collect(),
        source_locations: locs.clone(),
        tree: RectangleTree::new(0, (0..n).map(crate::fault::RectNode::Leaf).collect())?,
        locations: locs,
    };
    for _ in 0..r {
        let lv = phi(&sim.circuit, code, opts)?;
        // Leaves of the tree are the previous level's locations that descend from the original
        // circuit; boundary locations of the previous level stay outside.
        let ch = children(&lv.origin, lv.source_locations.len());
        let tree = sim.tree.refine(&ch)?;
        // Original qupit q occupied wires `sim.inputs[q]` of the previous level; each of those
        // is now a block of m inputs.
        let inputs = sim.inputs.iter().map(|ws| ws.iter().flat_map(|&w| lv.inputs[w].clone()).collect()).collect();
        let prev_live = sim.circuit.live_wires();
        let pos: FxHashMap<usize, usize> = prev_live.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let outputs = sim.outputs.iter().map(|ws| ws.iter().flat_map(|w| lv.outputs[pos[w]].clone()).collect()).collect();
        sim = SimulatedCircuit {
            circuit: lv.circuit,
            level: sim.level + 1,
            code: sim.code.clone(),
            options: *opts,
            inputs,
            outputs,
            periods: lv.periods,
            locations: lv.locations,
            origin: lv.origin,
            source_locations: lv.source_locations,
            tree,
        };
    }
    Ok(sim)
}

/// Rectangle tree of a compiled circuit, with the refinement invariant rechecked.
pub fn rectangle_tree(sim: &SimulatedCircuit) -> Result<RectangleTree> {
    RectangleTree::new(sim.tree.levels(), sim.tree.roots().to_vec())
}

/// r-fold nested plurality over groups of m consecutive digits (smallest value wins ties).
pub fn recursive_majority(digits: &[u8], m: usize, r: usize) -> Result<u8> {
    let want = m.checked_pow(r as u32).ok_or_else(|| Error::TooLarge("m^r overflows".into()))?;
    if digits.len() != want || m == 0 {
        return Err(Error::LengthMismatch { expected: want, got: digits.len() });
    }
    let mut cur = digits.to_vec();
    for _ in 0..r {
        cur = cur
            .chunks(m)
            .map(|g| {
                let mut count = [0usize; 256];
                for &d in g {
                    count[d as usize] += 1;
                }
                let best = *count.iter().max().expect("nonempty");
                count.iter().position(|&c| c == best).expect("present") as u8
            })
            .collect();
    }
    Ok(cur[0])
}

/// Outcome of propagating every sparse fault path through the working periods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropagationReport {
    pub periods: usize,
    pub rectangles: usize,
    /// Single faults (location, Pauli assignment) propagated.
    pub single_faults: usize,
    /// Fault combinations (at most one per rectangle) evaluated per block.
    pub combinations: u64,
    /// Largest residual weight seen in any block at a period end.
    pub max_block_weight: usize,
    pub violations: u64,
}

fn pauli_assignments(p: u32, k: usize) -> Vec<Vec<(u32, u32)>> {
    let total = (p as usize * p as usize).pow(k as u32);
    (1..total)
        .map(|mut i| {
            (0..k)
                .map(|_| {
                    let x = (i % p as usize) as u32;
                    i /= p as usize;
                    let z = (i % p as usize) as u32;
                    i /= p as usize;
                    (x, z)
                })
                .collect()
        })
        .collect()
}

/// Checks that every fault path with at most one fault per rectangle leaves each block with at
/// most t erroneous qupits at the end of its working period. Needs a level-1 compilation with
/// ideal EC and no boundary stages, over Clifford procedures. Residuals are linear in the faults,
/// so each single fault is propagated once and per-block residuals are combined exhaustively
/// over the rectangles that reach the block.
pub fn verify_sparse_propagation(sim: &SimulatedCircuit) -> Result<PropagationReport> {
    if sim.level != 1 || sim.options.ec != EcMode::Ideal || sim.options.boundary {
        return Err(Error::BadParams("needs a level-1 compilation with ideal EC and no boundary stages".into()));
    }
    let c = &sim.circuit;
    if let Some(g) = c.gates().iter().find(|g| !g.kind.is_clifford()) {
        return Err(Error::NonClifford(g.kind.name().into()));
    }
    let p = c.p();
    let t = sim.code.t();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); c.depth()];
    for i in 0..c.len() {
        by_level[c.level_of(i)].push(i);
    }
    let rects = sim.rectangles();
    let mut report = PropagationReport {
        periods: sim.periods.len(),
        rectangles: rects.iter().filter(|r| !r.is_empty()).count(),
        single_faults: 0,
        combinations: 0,
        max_block_weight: 0,
        violations: 0,
    };
    for period in &sim.periods {
        let Some(step) = period.step else { continue };
        let blocks: Vec<(usize, &Vec<usize>)> = period.blocks.iter().enumerate().filter(|(_, b)| !b.is_empty()).collect();
        let in_period: Vec<usize> = (0..sim.source_locations.len()).filter(|&i| sim.source_locations[i].time == step).collect();
        // Per rectangle: the residual of every single fault, restricted to each block.
        type Residual = Vec<Vec<(u32, u32)>>;
        let per_rect: Vec<Vec<Residual>> = par::map(in_period.clone(), |li| {
            let mut out = Vec::new();
            for &loc in &rects[li] {
                let l = &sim.locations[loc];
                for a in pauli_assignments(p, l.qupits.len()) {
                    let mut f = PauliFrame::new(p, c.wires());
                    for (&w, &(x, z)) in l.qupits.iter().zip(&a) {
                        f.inject(w, x, z);
                    }
                    for gates in &by_level[l.time + 1..period.levels.end] {
                        for &g in gates {
                            f.apply(&c.gates()[g]).expect("Clifford");
                        }
                    }
                    out.push(blocks.iter().map(|(_, b)| b.iter().map(|&w| f.get(w)).collect()).collect());
                }
            }
            out
        });
        report.single_faults += per_rect.iter().map(|r| r.len()).sum::<usize>();
        for (bi, (_, blk)) in blocks.iter().enumerate() {
            let reaching: Vec<&Vec<Residual>> =
                per_rect.iter().filter(|r| r.iter().any(|res| res[bi].iter().any(|&(x, z)| x + z > 0))).collect();
            // Exhaustive over at most one fault in each reaching rectangle.
            let mut acc: Vec<Vec<(u32, u32)>> = vec![vec![(0, 0); blk.len()]];
            for r in &reaching {
                let mut next = Vec::with_capacity(acc.len() * (r.len() + 1));
                for base in &acc {
                    next.push(base.clone());
                    for res in r.iter() {
                        next.push(base.iter().zip(&res[bi]).map(|(&(a, b), &(x, z))| ((a + x) % p, (b + z) % p)).collect());
                    }
                }
                if next.len() > 50_000_000 {
                    return Err(Error::TooLarge("too many fault combinations for one block".into()));
                }
                acc = next;
            }
            for res in &acc {
                let w = res.iter().filter(|&&(x, z)| x + z > 0).count();
                report.max_block_weight = report.max_block_weight.max(w);
                if w > t {
                    report.violations += 1;
                }
            }
            report.combinations += acc.len() as u64;
        }
    }
    Ok(report)
}
