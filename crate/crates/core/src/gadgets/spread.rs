use super::css::ec_gadget;
use super::{BlockSpec, Gadget};
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::exec::PackedState;
use crate::par;
use crate::qcode::CodeKind;
use crate::state::{SparseState, SparseVec, C64};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct SpreadOptions {
    /// Run error correction on every code input block first.
    pub preceding_ec: bool,
    /// Largest affected set searched for; faults beyond it count as hitting whole blocks.
    pub max_affected: usize,
    /// Total amplitude terms kept in ideal checkpoints.
    pub checkpoint_budget: usize,
    /// Gates between comparisons of a faulty run with the noiseless one.
    pub compare_every: usize,
}

impl Default for SpreadOptions {
    fn default() -> Self {
        Self { preceding_ec: false, max_affected: 4, checkpoint_budget: 4_000_000, compare_every: 32 }
    }
}

/// Worst spread of single faults at one gate location.
#[derive(Debug, Clone, Serialize)]
pub struct LocationSpread {
    /// Gate index in the measured circuit; None for the idle step before the first gate.
    pub gate: Option<usize>,
    pub kind: String,
    /// Largest number of affected qupits in each output block.
    pub per_block: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpreadReport {
    pub gadget: String,
    pub preceding_ec: bool,
    /// Max over locations and output blocks.
    pub l: usize,
    pub faults_run: usize,
    /// Faults whose affected set exceeded the search bound.
    pub conservative: usize,
    /// Idle steps, each equivalent to a fault right after the previous gate on its wire.
    pub identity_locations: usize,
    pub locations: Vec<LocationSpread>,
}

struct Measured {
    circuit: Circuit,
    n_refs: usize,
    outputs: Vec<Vec<usize>>,
    input_wires: Vec<usize>,
}

fn build(g: &Gadget, preceding_ec: bool) -> Result<Measured> {
    let n_refs = g.inputs.len();
    let n_in = g.circuit.inputs();
    let mut c = Circuit::new(g.p(), n_refs + n_in);
    let mut wire: Vec<usize> = (n_refs..n_refs + n_in).collect();
    if preceding_ec {
        for (blk, spec) in g.inputs.iter().zip(&g.input_specs) {
            if let BlockSpec::Code(code) = spec {
                if code.kind() == CodeKind::CssF2 && code.t() > 0 {
                    let ec = ec_gadget(code)?;
                    let ins: Vec<usize> = blk.iter().map(|&w| wire[w]).collect();
                    let map = c.append(&ec.circuit, &ins);
                    for (&w, &o) in blk.iter().zip(&ec.outputs[0]) {
                        wire[w] = map[o];
                    }
                }
            }
        }
    }
    let map = c.append(&g.circuit, &wire);
    let outputs = g.outputs.iter().map(|b| b.iter().map(|&w| map[w]).collect()).collect();
    Ok(Measured { circuit: c, n_refs, outputs, input_wires: (n_refs..n_refs + n_in).collect() })
}

/// Reference digits entangled with the logical value of every input block.
fn choi_input(g: &Gadget) -> Result<SparseState> {
    let p = g.p();
    let mut terms: Vec<(Vec<u8>, Vec<u8>, C64)> = vec![(Vec::new(), Vec::new(), C64::new(1.0, 0.0))];
    for spec in &g.input_specs {
        let dim = match spec {
            BlockSpec::Code(c) => c.logical_dim(),
            BlockSpec::Repeated(_) => p as u64,
        };
        if dim != p as u64 {
            return Err(Error::Unsupported("spread needs one logical qupit per block".into()));
        }
        let s = (1.0 / p as f64).sqrt();
        let mut next = Vec::new();
        for a in 0..p as u64 {
            let b = spec.basis(p, a)?;
            for (r, d, amp) in &terms {
                for (k, x) in b.terms() {
                    let mut r = r.clone();
                    r.push(a as u8);
                    let mut d = d.clone();
                    d.extend_from_slice(k);
                    next.push((r, d, amp * x * s));
                }
            }
        }
        terms = next;
    }
    let n = g.inputs.len() + g.circuit.inputs();
    Ok(SparseState::from_terms(
        p,
        n,
        terms.into_iter().map(|(mut r, d, a)| {
            r.extend(d);
            (r, a)
        }),
    ))
}

fn gram(x: &[SparseVec], y: &[SparseVec]) -> f64 {
    let mut s = 0.0;
    for u in x {
        for v in y {
            let (small, big) = if u.len() <= v.len() { (u, v) } else { (v, u) };
            let ov: C64 = small.iter().filter_map(|(k, a)| big.get(k).map(|b| a.conj() * b)).sum();
            s += ov.norm_sqr();
        }
    }
    s
}

/// Squared Frobenius distance between the marginals on `keep`.
fn marginal_gap(ideal: &SparseState, faulty: &SparseState, keep: &[usize]) -> f64 {
    let vi = ideal.reduced_vectors(keep);
    let vf = faulty.reduced_vectors(keep);
    gram(&vi, &vi) + gram(&vf, &vf) - 2.0 * gram(&vi, &vf)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            if rec(i + 1, n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, k, &mut Vec::new(), f)
}

/// Minimal affected output set, as counts per block; None past the search bound.
fn affected(ideal: &SparseState, faulty: &SparseState, n_refs: usize, blocks: &[usize], cap: usize) -> Option<Vec<usize>> {
    let n_out: usize = blocks.iter().sum();
    let owner: Vec<usize> = blocks.iter().enumerate().flat_map(|(b, &len)| std::iter::repeat_n(b, len)).collect();
    let scale = ideal.norm_sqr().max(1e-300);
    for k in 0..=cap.min(n_out) {
        let mut found = None;
        combinations(n_out, k, &mut |a| {
            let keep: Vec<usize> = (0..n_refs).chain((0..n_out).filter(|i| !a.contains(i)).map(|i| n_refs + i)).collect();
            if marginal_gap(ideal, faulty, &keep) < 1e-9 * scale {
                let mut counts = vec![0; blocks.len()];
                for &i in a {
                    counts[owner[i]] += 1;
                }
                found = Some(counts);
                true
            } else {
                false
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

struct Fault {
    gate: Option<usize>,
    wire: usize,
}

/// Measures how single faults spread into the output blocks. Every non-discard gate location
/// gets each nonidentity Pauli on each of its wires right after the gate; idle input wires get
/// them before the first gate. The input is a purification whose reference digits carry the
/// logical value of every block, so a qupit set A is unaffected when the output marginal off A
/// matches the noiseless one.
pub fn measure_spread(g: &Gadget, opts: &SpreadOptions) -> Result<SpreadReport> {
    let ms = build(g, opts.preceding_ec)?;
    let c = &ms.circuit;
    let p = g.p();
    let input = choi_input(g)?;
    let keep_wires: Vec<usize> = (0..ms.n_refs).chain(ms.outputs.concat()).collect();
    let blocks: Vec<usize> = ms.outputs.iter().map(|b| b.len()).collect();

    let mut probe = PackedState::new(&input)?;
    let mut total = 0usize;
    for i in 0..c.len() {
        probe.run_range(c, i, i + 1)?;
        total += probe.len();
    }
    let stride = total.div_ceil(opts.checkpoint_budget.max(1)).max(1);
    let every = opts.compare_every.div_ceil(stride).max(1) * stride;
    let mut checkpoints: Vec<PackedState> = Vec::new();
    let mut st = PackedState::new(&input)?;
    for i in 0..c.len() {
        if i % stride == 0 {
            checkpoints.push(st.clone());
        }
        st.run_range(c, i, i + 1)?;
    }
    let (ideal_out, _) = st.purified(&keep_wires);

    let mut faults: Vec<Fault> = ms.input_wires.iter().map(|&w| Fault { gate: None, wire: w }).collect();
    for (i, gate) in c.gates().iter().enumerate() {
        if gate.kind == GateKind::Discard {
            continue;
        }
        for w in gate.targets() {
            faults.push(Fault { gate: Some(i), wire: w });
        }
    }
    let paulis: Vec<(u32, u32)> = (0..p).flat_map(|x| (0..p).map(move |z| (x, z))).filter(|&(x, z)| x + z > 0).collect();

    let results: Vec<Result<(Vec<usize>, usize)>> = par::map(faults.iter().collect(), |f| {
        let start = f.gate.map_or(0, |g| g + 1);
        let ck = if start == 0 { 0 } else { (start - 1) / stride };
        let mut base = checkpoints[ck.min(checkpoints.len().saturating_sub(1))].clone();
        if f.gate.is_some() {
            base.run_range(c, ck * stride, start)?;
        }
        let mut worst = vec![0usize; blocks.len()];
        let mut conservative = 0;
        for &(x, z) in &paulis {
            let mut s = base.clone();
            s.apply_pauli(f.wire, x, z);
            let mut pos = start;
            let mut clean = false;
            while pos < c.len() {
                let next = ((pos / every) + 1) * every;
                let end = next.min(c.len());
                s.run_range(c, pos, end)?;
                pos = end;
                if pos < c.len() && s.same_as(&checkpoints[pos / stride], 1e-9) {
                    clean = true;
                    break;
                }
            }
            if clean {
                continue;
            }
            let (out, _) = s.purified(&keep_wires);
            match affected(&ideal_out, &out, ms.n_refs, &blocks, opts.max_affected) {
                Some(counts) => {
                    for (w, k) in worst.iter_mut().zip(counts) {
                        *w = (*w).max(k);
                    }
                }
                None => {
                    conservative += 1;
                    worst.clone_from(&blocks);
                }
            }
        }
        Ok((worst, conservative))
    });

    let mut locations: Vec<LocationSpread> = Vec::new();
    let mut conservative = 0;
    let mut l = 0;
    for (f, r) in faults.iter().zip(results) {
        let (worst, cons) = r?;
        conservative += cons;
        l = l.max(worst.iter().copied().max().unwrap_or(0));
        match locations.last_mut() {
            Some(last) if f.gate.is_some() && last.gate == f.gate => {
                for (a, b) in last.per_block.iter_mut().zip(&worst) {
                    *a = (*a).max(*b);
                }
            }
            _ => locations.push(LocationSpread {
                gate: f.gate,
                kind: f.gate.map_or("idle".into(), |i| c.gates()[i].kind.name().into()),
                per_block: worst,
            }),
        }
    }
    Ok(SpreadReport {
        gadget: g.name.clone(),
        preceding_ec: opts.preceding_ec,
        l,
        faults_run: faults.len() * paulis.len(),
        conservative,
        identity_locations: identity_locations(c),
        locations,
    })
}

/// Idle (wire, level) pairs between a wire's first level and its retirement.
fn identity_locations(c: &Circuit) -> usize {
    let mut busy: Vec<Vec<usize>> = vec![Vec::new(); c.wires()];
    for (i, g) in c.gates().iter().enumerate() {
        for w in g.targets() {
            busy[w].push(c.level_of(i));
        }
    }
    busy.iter()
        .enumerate()
        .map(|(w, lv)| {
            let first = if w < c.inputs() { 0 } else { lv.iter().copied().min().unwrap_or(0) };
            let last = lv.iter().copied().max().unwrap_or(0);
            let mut used = lv.clone();
            used.sort_unstable();
            used.dedup();
            (last + 1 - first).saturating_sub(used.len())
        })
        .sum()
}
