//! Locations, fault paths, noise samplers, recursive sparseness and Pauli frames.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A gate (or the identity on an idle qupit) at one time step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Location {
    pub qupits: Vec<usize>,
    pub time: usize,
    /// Index of the gate in push order; None for an identity location.
    pub gate: Option<usize>,
}

/// Complete disjoint cover of the (qupit, step) pairs of `c` by locations, sorted by time.
pub fn locations(c: &Circuit) -> Vec<Location> {
    locations_over(c, c.depth())
}

/// As `locations`, over at least `steps` time steps (idle trailing steps included).
pub fn locations_over(c: &Circuit, steps: usize) -> Vec<Location> {
    let steps = steps.max(c.depth());
    let n = c.wires();
    let mut start: Vec<usize> = vec![0; n];
    let mut end: Vec<usize> = vec![steps; n];
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); steps];
    for (i, g) in c.gates().iter().enumerate() {
        let t = c.level_of(i);
        by_level[t].push(i);
        match g.kind {
            GateKind::AddBlank => start[g.target(0)] = t,
            GateKind::Discard => end[g.target(0)] = t + 1,
            _ => {}
        }
    }
    let mut out = Vec::new();
    for (t, gates) in by_level.iter().enumerate() {
        let mut busy = vec![false; n];
        let mut here: Vec<Location> = gates
            .iter()
            .map(|&i| {
                let q = c.gates()[i].target_vec();
                for &w in &q {
                    busy[w] = true;
                }
                Location { qupits: q, time: t, gate: Some(i) }
            })
            .collect();
        for w in 0..n {
            if !busy[w] && start[w] <= t && t < end[w] {
                here.push(Location { qupits: vec![w], time: t, gate: None });
            }
        }
        here.sort_by(|a, b| a.qupits.cmp(&b.qupits));
        out.extend(here);
    }
    out
}

/// Indices into a location list, ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FaultPath {
    pub indices: Vec<usize>,
}

impl FaultPath {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Dump format: one line `t q1,q2,...` per faulty location, sorted by time.
    pub fn dump(&self, locs: &[Location]) -> String {
        let mut rows: Vec<&Location> = self.indices.iter().map(|&i| &locs[i]).collect();
        rows.sort_by(|a, b| (a.time, &a.qupits).cmp(&(b.time, &b.qupits)));
        rows.iter()
            .map(|l| {
                let q: Vec<String> = l.qupits.iter().map(|q| q.to_string()).collect();
                format!("{} {}\n", l.time, q.join(","))
            })
            .collect()
    }
}

/// Independent RNG stream for one trial of a seeded experiment.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Markov burst chain over a time-ordered location list. A quiet location starts a burst with
/// probability `q`; a burst continues to the next location with probability `s` and otherwise
/// ends, after which the next location may start a new one. Every location in a burst is faulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BurstChain {
    pub eta: f64,
    pub mean_burst: f64,
    pub q: f64,
    pub s: f64,
}

impl BurstChain {
    /// Chain with stationary fault rate `eta` and geometric burst length of mean `mean_burst`.
    pub fn new(eta: f64, mean_burst: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) || mean_burst < 1.0 {
            return Err(Error::BadParams(format!("burst chain needs 0 <= eta < 1 and mean >= 1, got {eta}, {mean_burst}")));
        }
        let s = 1.0 - 1.0 / mean_burst;
        let q = eta * (1.0 - s) / (1.0 - eta + eta * (1.0 - s));
        Ok(Self { eta, mean_burst, q, s })
    }

    /// Pr(fault | previous location faulty).
    pub fn stay(&self) -> f64 {
        self.s + (1.0 - self.s) * self.q
    }

    /// Lag-one correlation of the fault indicators.
    pub fn lag(&self) -> f64 {
        self.stay() - self.q
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> FaultPath {
        let mut out = Vec::new();
        let mut on = rng.gen::<f64>() < self.eta;
        for i in 0..n {
            if i > 0 {
                let pr = if on { self.stay() } else { self.q };
                on = rng.gen::<f64>() < pr;
            }
            if on {
                out.push(i);
            }
        }
        FaultPath { indices: out }
    }

    /// Exact probability of the fault pattern `bits` on a chain of `bits.len()` locations.
    pub fn path_probability(&self, bits: &[bool]) -> f64 {
        let mut pr = 1.0;
        let mut prev: Option<bool> = None;
        for &b in bits {
            let on = match prev {
                None => self.eta,
                Some(true) => self.stay(),
                Some(false) => self.q,
            };
            pr *= if b { on } else { 1.0 - on };
            prev = Some(b);
        }
        pr
    }

    /// Largest ratio Pr(path) / (eta^k (1-eta)^(v-k)) over every path on `v` locations with at
    /// most `kmax` faults, found by exhaustive enumeration.
    pub fn measured_c(&self, v: usize, kmax: usize) -> f64 {
        let mut best: f64 = 0.0;
        let mut bits = vec![false; v];
        fn rec(ch: &BurstChain, bits: &mut Vec<bool>, from: usize, left: usize, k: usize, best: &mut f64) {
            let v = bits.len();
            let iid = ch.eta.powi(k as i32) * (1.0 - ch.eta).powi((v - k) as i32);
            if iid > 0.0 {
                *best = best.max(ch.path_probability(bits) / iid);
            }
            if left == 0 {
                return;
            }
            for i in from..v {
                bits[i] = true;
                rec(ch, bits, i + 1, left - 1, k + 1, best);
                bits[i] = false;
            }
        }
        rec(self, &mut bits, 0, kmax, 0, &mut best);
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NoiseKind {
    Iid,
    Burst { mean_burst: f64 },
}

/// Fault sampler over time-ordered locations; trial t uses stream t of `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub eta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn iid(eta: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::Iid, eta, seed }
    }

    pub fn burst(eta: f64, mean_burst: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::Burst { mean_burst }, eta, seed }
    }

    pub fn sample(&self, n: usize, trial: u64) -> Result<FaultPath> {
        let mut rng = trial_rng(self.seed, trial);
        match self.kind {
            NoiseKind::Iid => Ok(iid_indices(n, self.eta, &mut rng)),
            NoiseKind::Burst { mean_burst } => Ok(BurstChain::new(self.eta, mean_burst)?.sample(n, &mut rng)),
        }
    }
}

fn iid_indices(n: usize, eta: f64, rng: &mut impl Rng) -> FaultPath {
    FaultPath { indices: (0..n).filter(|_| rng.gen::<f64>() < eta).collect() }
}

/// Each location faulty independently with probability `eta`.
pub fn sample_iid(locs: &[Location], eta: f64, seed: u64) -> FaultPath {
    iid_indices(locs.len(), eta, &mut trial_rng(seed, 0))
}

/// Burst-correlated faults (mean burst length 2) with marginal rate `eta`.
pub fn sample_burst(locs: &[Location], eta: f64, seed: u64) -> Result<FaultPath> {
    NoiseSpec::burst(eta, 2.0, seed).sample(locs.len(), 0)
}

/// Node of a rectangle tree: a leaf is a location index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RectNode {
    Leaf(usize),
    Rect(Vec<RectNode>),
}

impl RectNode {
    fn depth_ok(&self, s: usize) -> bool {
        match self {
            RectNode::Leaf(_) => s == 0,
            RectNode::Rect(ch) => s > 0 && ch.iter().all(|c| c.depth_ok(s - 1)),
        }
    }

    fn refine(&self, children: &[Vec<usize>]) -> RectNode {
        match self {
            RectNode::Leaf(i) => RectNode::Rect(children[*i].iter().map(|&c| RectNode::Leaf(c)).collect()),
            RectNode::Rect(ch) => RectNode::Rect(ch.iter().map(|c| c.refine(children)).collect()),
        }
    }

    fn branching(&self) -> usize {
        match self {
            RectNode::Leaf(_) => 0,
            RectNode::Rect(ch) => ch.iter().map(|c| c.branching()).max().unwrap_or(0).max(ch.len()),
        }
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            RectNode::Leaf(i) => out.push(*i),
            RectNode::Rect(ch) => ch.iter().for_each(|c| c.collect(out)),
        }
    }

    /// Whether this s-rectangle is (s,k)-sparse; tallies non-sparse nodes per level.
    fn sparse(&self, s: usize, faulty: &dyn Fn(usize) -> bool, k: usize, bad: &mut [usize]) -> bool {
        let ok = match self {
            RectNode::Leaf(i) => !faulty(*i),
            RectNode::Rect(ch) => ch.iter().filter(|c| !c.sparse(s - 1, faulty, k, bad)).count() <= k,
        };
        if !ok {
            bad[s] += 1;
        }
        ok
    }
}

/// r-level partition of locations into nested rectangles; roots are the r-rectangles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RectangleTree {
    levels: usize,
    roots: Vec<RectNode>,
}

impl RectangleTree {
    /// Checks that every leaf sits at depth exactly `levels` and no leaf repeats.
    pub fn new(levels: usize, roots: Vec<RectNode>) -> Result<Self> {
        if !roots.iter().all(|r| r.depth_ok(levels)) {
            return Err(Error::BadParams("rectangle tree leaves must all sit at depth r".into()));
        }
        let t = Self { levels, roots };
        let mut l = t.leaves();
        let n = l.len();
        l.sort_unstable();
        l.dedup();
        if l.len() != n {
            return Err(Error::BadParams("rectangle tree repeats a location".into()));
        }
        Ok(t)
    }

    /// `roots` r-rectangles, each with `a` children per level; leaves numbered in order.
    pub fn uniform(a: usize, r: usize, roots: usize) -> Self {
        fn build(a: usize, s: usize, next: &mut usize) -> RectNode {
            if s == 0 {
                *next += 1;
                RectNode::Leaf(*next - 1)
            } else {
                RectNode::Rect((0..a).map(|_| build(a, s - 1, next)).collect())
            }
        }
        let mut next = 0;
        let roots = (0..roots).map(|_| build(a, r, &mut next)).collect();
        Self { levels: r, roots }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// One level deeper: leaf i becomes a rectangle over the leaves `children[i]`.
    pub fn refine(&self, children: &[Vec<usize>]) -> Result<Self> {
        Self::new(self.levels + 1, self.roots.iter().map(|r| r.refine(children)).collect())
    }

    /// Largest number of children of any rectangle.
    pub fn max_branching(&self) -> usize {
        self.roots.iter().map(|r| r.branching()).max().unwrap_or(0)
    }

    pub fn roots(&self) -> &[RectNode] {
        &self.roots
    }

    /// Leaf location indices in tree order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.roots.iter().for_each(|r| r.collect(&mut out));
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Largest leaf count of a single root rectangle.
    pub fn max_rectangle(&self) -> usize {
        self.roots
            .iter()
            .map(|r| {
                let mut v = Vec::new();
                r.collect(&mut v);
                v.len()
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SparseVerdict {
    /// Every r-rectangle is (r,k)-sparse.
    pub sparse: bool,
    /// Entry s counts the s-rectangles that are not (s,k)-sparse (s = 0 counts faulty leaves).
    pub bad_per_level: Vec<usize>,
    /// Verdict per root.
    pub roots: Vec<bool>,
}

/// Recursive sparseness: a leaf is (0,k)-sparse iff fault-free; an s-rectangle is (s,k)-sparse
/// iff at most k of its children are not (s-1,k)-sparse.
pub fn is_sparse(path: &FaultPath, tree: &RectangleTree, k: usize) -> SparseVerdict {
    let faulty = |i: usize| path.contains(i);
    let mut bad = vec![0; tree.levels + 1];
    let roots: Vec<bool> = tree.roots.iter().map(|r| r.sparse(tree.levels, &faulty, k, &mut bad)).collect();
    SparseVerdict { sparse: roots.iter().all(|&b| b), bad_per_level: bad, roots }
}

/// Generalized Pauli frame: wire w carries B^x P^z (up to phase).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    p: u32,
    x: Vec<u32>,
    z: Vec<u32>,
}

impl PauliFrame {
    pub fn new(p: u32, wires: usize) -> Self {
        Self { p, x: vec![0; wires], z: vec![0; wires] }
    }

    pub fn get(&self, w: usize) -> (u32, u32) {
        (self.x[w], self.z[w])
    }

    /// Multiplies B^x P^z into wire `w`.
    pub fn inject(&mut self, w: usize, x: u32, z: u32) {
        self.x[w] = (self.x[w] + x) % self.p;
        self.z[w] = (self.z[w] + z) % self.p;
    }

    pub fn is_trivial(&self, w: usize) -> bool {
        self.x[w] == 0 && self.z[w] == 0
    }

    fn inv(&self, a: u32) -> u32 {
        let mut r = 1u64;
        for _ in 0..self.p - 2 {
            r = r * a as u64 % self.p as u64;
        }
        r as u32
    }

    /// Conjugates the frame through `g`.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        let p = self.p;
        let neg = |v: u32| (p - v) % p;
        match g.kind {
            GateKind::Not | GateKind::GenNot(_) | GateKind::PhaseRot(_) => {}
            GateKind::Cnot | GateKind::GenCnot => {
                let (a, b) = (g.target(0), g.target(1));
                self.x[b] = (self.x[b] + self.x[a]) % p;
                self.z[a] = (self.z[a] + neg(self.z[b])) % p;
            }
            GateKind::Mul(c) => {
                let w = g.target(0);
                self.x[w] = self.x[w] * c % p;
                self.z[w] = self.z[w] * self.inv(c) % p;
            }
            GateKind::Phase => {
                let w = g.target(0);
                self.z[w] ^= self.x[w];
            }
            GateKind::CPhase => {
                let (a, b) = (g.target(0), g.target(1));
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
            GateKind::Hadamard | GateKind::Fourier(_) => {
                let r = g.kind.param().unwrap_or(1);
                let w = g.target(0);
                let (x, z) = (self.x[w], self.z[w]);
                self.x[w] = neg(self.inv(r) * z % p);
                self.z[w] = r * x % p;
            }
            GateKind::Swap => {
                let (a, b) = (g.target(0), g.target(1));
                self.x.swap(a, b);
                self.z.swap(a, b);
            }
            GateKind::AddBlank | GateKind::Discard | GateKind::Restart => {
                let w = g.target(0);
                self.x[w] = 0;
                self.z[w] = 0;
            }
            GateKind::Toffoli | GateKind::GenToffoli => return Err(Error::NonClifford(g.kind.name().into())),
        }
        Ok(())
    }
}

/// Frame after propagation plus the affected positions of each output block.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResidual {
    pub frame: PauliFrame,
    pub per_block: Vec<Vec<usize>>,
}

/// Pushes the Pauli faults of `path` through `c` symbolically. `assignment[j]` holds one
/// (x, z) pair per qupit of the location `path.indices[j]`, applied right after that location.
/// `initial` is the frame on entry (None for clean inputs).
pub fn pauli_frame_propagate(
    c: &Circuit,
    locs: &[Location],
    path: &FaultPath,
    assignment: &[Vec<(u32, u32)>],
    initial: Option<&PauliFrame>,
    outputs: &[Vec<usize>],
) -> Result<FrameResidual> {
    if let Some(g) = c.gates().iter().find(|g| !g.kind.is_clifford()) {
        return Err(Error::NonClifford(g.kind.name().into()));
    }
    if assignment.len() != path.len() {
        return Err(Error::LengthMismatch { expected: path.len(), got: assignment.len() });
    }
    let mut frame = PauliFrame::new(c.p(), c.wires());
    if let Some(init) = initial {
        for w in 0..init.x.len().min(c.wires()) {
            frame.inject(w, init.x[w], init.z[w]);
        }
    }
    let mut faults_at: Vec<Vec<usize>> = vec![Vec::new(); c.depth().max(locs.iter().map(|l| l.time + 1).max().unwrap_or(0))];
    for (j, &i) in path.indices.iter().enumerate() {
        let l = &locs[i];
        if assignment[j].len() != l.qupits.len() {
            return Err(Error::LengthMismatch { expected: l.qupits.len(), got: assignment[j].len() });
        }
        faults_at[l.time].push(j);
    }
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); faults_at.len()];
    for i in 0..c.len() {
        by_level[c.level_of(i)].push(i);
    }
    for (t, gates) in by_level.iter().enumerate() {
        for &i in gates {
            frame.apply(&c.gates()[i])?;
        }
        for &j in &faults_at[t] {
            let l = &locs[path.indices[j]];
            for (&w, &(x, z)) in l.qupits.iter().zip(&assignment[j]) {
                frame.inject(w, x, z);
            }
        }
    }
    let per_block = outputs.iter().map(|b| (0..b.len()).filter(|&i| !frame.is_trivial(b[i])).collect()).collect();
    Ok(FrameResidual { frame, per_block })
}
