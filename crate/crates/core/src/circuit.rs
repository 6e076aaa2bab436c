//! Leveled gate lists over p-level wires.
//!
//! Wires are never reused: `add` creates a fresh wire and `discard` retires one. Levels are
//! assigned as gates are pushed: ASAP for ordinary gates, while an `add` is placed on the level
//! just before the first use of its wire.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Not,
    Cnot,
    /// |a> -> i^a |a>.
    Phase,
    /// |a,b> -> (-1)^{ab} |a,b>.
    CPhase,
    Hadamard,
    Toffoli,
    /// |a> -> |a + c>.
    GenNot(u32),
    /// |a,b> -> |a, a + b>.
    GenCnot,
    /// |a> -> |c a>, c != 0.
    Mul(u32),
    /// |a> -> w^{c a} |a>.
    PhaseRot(u32),
    /// W_r : |a> -> p^{-1/2} sum_b w^{r a b} |b>, 0 < r < p.
    Fourier(u32),
    /// |a,b,c> -> |a, b, c + a b>.
    GenToffoli,
    Swap,
    AddBlank,
    Discard,
    /// Discard followed by a fresh blank wire in the same place, one location.
    Restart,
}

/// The two gate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSet {
    G1,
    G2,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::CPhase | GateKind::GenCnot | GateKind::Swap => 2,
            GateKind::Toffoli | GateKind::GenToffoli => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "not",
            GateKind::Cnot => "cnot",
            GateKind::Phase => "phase",
            GateKind::CPhase => "cphase",
            GateKind::Hadamard => "h",
            GateKind::Toffoli => "toffoli",
            GateKind::GenNot(_) => "gnot",
            GateKind::GenCnot => "gcnot",
            GateKind::Mul(_) => "mul",
            GateKind::PhaseRot(_) => "prot",
            GateKind::Fourier(_) => "fourier",
            GateKind::GenToffoli => "gtoffoli",
            GateKind::Swap => "swap",
            GateKind::AddBlank => "add",
            GateKind::Discard => "discard",
            GateKind::Restart => "restart",
        }
    }

    pub fn param(self) -> Option<u32> {
        match self {
            GateKind::GenNot(c) | GateKind::Mul(c) | GateKind::PhaseRot(c) | GateKind::Fourier(c) => Some(c),
            _ => None,
        }
    }

    fn parse(name: &str, param: Option<u32>) -> Result<Self> {
        let need = |k: fn(u32) -> GateKind| param.map(k).ok_or_else(|| Error::Parse(format!("{name} needs a parameter")));
        let plain = |k: GateKind| if param.is_none() { Ok(k) } else { Err(Error::Parse(format!("{name} takes no parameter"))) };
        match name {
            "not" => plain(GateKind::Not),
            "cnot" => plain(GateKind::Cnot),
            "phase" => plain(GateKind::Phase),
            "cphase" => plain(GateKind::CPhase),
            "h" => plain(GateKind::Hadamard),
            "toffoli" => plain(GateKind::Toffoli),
            "gnot" => need(GateKind::GenNot),
            "gcnot" => plain(GateKind::GenCnot),
            "mul" => need(GateKind::Mul),
            "prot" => need(GateKind::PhaseRot),
            "fourier" => need(GateKind::Fourier),
            "gtoffoli" => plain(GateKind::GenToffoli),
            "swap" => plain(GateKind::Swap),
            "add" => plain(GateKind::AddBlank),
            "discard" => plain(GateKind::Discard),
            "restart" => plain(GateKind::Restart),
            _ => Err(Error::Parse(format!("unknown gate {name}"))),
        }
    }

    pub fn in_set(self, set: GateSet) -> bool {
        use GateKind::*;
        match self {
            Swap | AddBlank | Discard | Restart => true,
            Not | Cnot | Phase | CPhase | Hadamard | Toffoli => set == GateSet::G1,
            GenNot(_) | GenCnot | Mul(_) | PhaseRot(_) | Fourier(_) | GenToffoli => set == GateSet::G2,
        }
    }

    /// Whether the gate permutes basis states up to a phase.
    pub fn is_classical(self) -> bool {
        !matches!(self, GateKind::Hadamard | GateKind::Fourier(_))
    }

    /// Whether generalized Pauli errors stay Pauli when pushed through the gate.
    pub fn is_clifford(self) -> bool {
        !matches!(self, GateKind::Toffoli | GateKind::GenToffoli)
    }

    fn check(self, p: u32) -> Result<()> {
        let bad = |why: &str| Err(Error::BadParams(format!("{} {why} for p={p}", self.name())));
        match self {
            GateKind::Not | GateKind::Cnot | GateKind::Phase | GateKind::CPhase | GateKind::Hadamard | GateKind::Toffoli
                if p != 2 =>
            {
                bad("is a qubit gate")
            }
            GateKind::GenNot(c) | GateKind::PhaseRot(c) if c >= p => bad("parameter out of range"),
            GateKind::Mul(c) | GateKind::Fourier(c) if c == 0 || c >= p => bad("parameter must be in 1..p"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    targets: [u32; 3],
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Self {
        assert_eq!(targets.len(), kind.arity(), "{} takes {} targets", kind.name(), kind.arity());
        let mut t = [u32::MAX; 3];
        for (s, &q) in t.iter_mut().zip(targets) {
            *s = q as u32;
        }
        Self { kind, targets: t }
    }

    #[inline]
    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets[..self.kind.arity()].iter().map(|&q| q as usize)
    }

    #[inline]
    pub fn target(&self, i: usize) -> usize {
        self.targets[i] as usize
    }

    pub fn target_vec(&self) -> Vec<usize> {
        self.targets().collect()
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        match self.kind.param() {
            Some(c) => write!(f, " {c}")?,
            None => write!(f, " -")?,
        }
        for q in self.targets() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// Leveled circuit. Wires `0..inputs` are live at the start; others come from `add`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    p: u32,
    inputs: usize,
    wires: usize,
    gates: Vec<Gate>,
    level: Vec<usize>,
    depth: usize,
    ready: Vec<usize>,
    pending_add: Vec<Option<usize>>,
    live: Vec<bool>,
    floor: usize,
}

impl Circuit {
    pub fn new(p: u32, inputs: usize) -> Self {
        Self {
            p,
            inputs,
            wires: inputs,
            gates: Vec::new(),
            level: Vec::new(),
            depth: 0,
            ready: vec![0; inputs],
            pending_add: vec![None; inputs],
            live: vec![true; inputs],
            floor: 0,
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// Total wires ever created.
    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Level of the i-th gate in push order.
    pub fn level_of(&self, i: usize) -> usize {
        self.level[i]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_live(&self, w: usize) -> bool {
        self.live[w]
    }

    /// Wires live at the end, ascending.
    pub fn live_wires(&self) -> Vec<usize> {
        (0..self.wires).filter(|&w| self.live[w]).collect()
    }

    /// Creates a fresh blank wire.
    pub fn add(&mut self) -> usize {
        let w = self.wires;
        self.wires += 1;
        self.ready.push(0);
        self.live.push(true);
        self.gates.push(Gate::new(GateKind::AddBlank, &[w]));
        self.level.push(0);
        self.pending_add.push(Some(self.gates.len() - 1));
        w
    }

    pub fn add_n(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.add()).collect()
    }

    pub fn discard(&mut self, w: usize) {
        self.push(GateKind::Discard, &[w]);
    }

    pub fn discard_all(&mut self, ws: &[usize]) {
        for &w in ws {
            self.discard(w);
        }
    }

    /// Appends a gate; panics on invalid wires (construction bugs), see `try_push`.
    pub fn push(&mut self, kind: GateKind, targets: &[usize]) {
        self.try_push(kind, targets).unwrap_or_else(|e| panic!("{e}"));
    }

    pub fn try_push(&mut self, kind: GateKind, targets: &[usize]) -> Result<()> {
        self.push_from(kind, targets, 0)
    }

    /// Later gates start at or after the current depth (adds included).
    pub fn barrier(&mut self) {
        self.floor = self.depth;
    }

    fn push_from(&mut self, kind: GateKind, targets: &[usize], min_level: usize) -> Result<()> {
        kind.check(self.p)?;
        if targets.len() != kind.arity() {
            return Err(Error::BadTargets(format!("{} takes {} targets", kind.name(), kind.arity())));
        }
        if kind == GateKind::AddBlank {
            return Err(Error::BadTargets("use Circuit::add to create wires".into()));
        }
        for (i, &q) in targets.iter().enumerate() {
            if q >= self.wires || !self.live[q] {
                return Err(Error::BadTargets(format!("wire {q} is not live")));
            }
            if targets[..i].contains(&q) {
                return Err(Error::BadTargets(format!("wire {q} repeated")));
            }
        }
        let fresh = targets.iter().any(|&q| self.pending_add[q].is_some());
        let mut lvl = targets.iter().filter(|&&q| self.pending_add[q].is_none()).map(|&q| self.ready[q]).max().unwrap_or(0);
        lvl = lvl.max(self.floor).max(min_level);
        if fresh {
            lvl = lvl.max(self.floor + 1).max(1);
        }
        for &q in targets {
            if let Some(g) = self.pending_add[q].take() {
                self.level[g] = lvl - 1;
            }
            self.ready[q] = lvl + 1;
        }
        if kind == GateKind::Discard {
            self.live[targets[0]] = false;
        }
        self.gates.push(Gate::new(kind, targets));
        self.level.push(lvl);
        self.depth = self.depth.max(lvl + 1);
        Ok(())
    }

    pub fn not(&mut self, a: usize) {
        self.push(GateKind::Not, &[a]);
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        self.push(GateKind::Cnot, &[a, b]);
    }

    pub fn h(&mut self, a: usize) {
        self.push(GateKind::Hadamard, &[a]);
    }

    pub fn toffoli(&mut self, a: usize, b: usize, c: usize) {
        self.push(GateKind::Toffoli, &[a, b, c]);
    }

    /// Appends `other`, mapping its input wire i to `inputs[i]`; returns the wire map.
    pub fn append(&mut self, other: &Circuit, inputs: &[usize]) -> Vec<usize> {
        assert_eq!(other.p, self.p);
        assert_eq!(inputs.len(), other.inputs);
        let mut map: Vec<usize> = inputs.to_vec();
        map.resize(other.wires, usize::MAX);
        for g in &other.gates {
            if g.kind == GateKind::AddBlank {
                map[g.target(0)] = self.add();
            } else {
                let t: Vec<usize> = g.targets().map(|q| map[q]).collect();
                self.push(g.kind, &t);
            }
        }
        map
    }

    /// Gates grouped by level, each level sorted by target list.
    pub fn levels(&self) -> Vec<Vec<Gate>> {
        let mut out: Vec<Vec<Gate>> = vec![Vec::new(); self.depth];
        for (g, &l) in self.gates.iter().zip(&self.level) {
            out[l].push(*g);
        }
        for lv in &mut out {
            lv.sort_by_key(|g| g.target_vec());
        }
        out
    }

    /// First gate outside `set`, if any.
    pub fn foreign_gate(&self, set: GateSet) -> Option<Gate> {
        self.gates.iter().copied().find(|g| !g.kind.in_set(set))
    }

    pub fn check_gate_set(&self, set: GateSet) -> Result<()> {
        match self.foreign_gate(set) {
            Some(g) => Err(Error::ForeignGate(g.kind.name().into())),
            None => Ok(()),
        }
    }

    /// Text form: a header `p <p> inputs <n>`, then one gate per line `t name param targets`
    /// (param `-` when absent), levels separated by blank lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("p {} inputs {}\n", self.p, self.inputs);
        for (t, lv) in self.levels().iter().enumerate() {
            s.push('\n');
            for g in lv {
                s.push_str(&format!("{t} {g}\n"));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        let (p, inputs) = match head.as_slice() {
            ["p", p, "inputs", n] => (
                p.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?,
                n.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?,
            ),
            _ => return Err(Error::Parse("expected header `p <p> inputs <n>`".into())),
        };
        let mut rows: Vec<(usize, Gate)> = Vec::new();
        for line in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.is_empty() {
                continue;
            }
            if tok.len() < 3 {
                return Err(Error::Parse(format!("short line `{line}`")));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
            let t = num(tok[0])?;
            let param = if tok[2] == "-" { None } else { Some(num(tok[2])? as u32) };
            let kind = GateKind::parse(tok[1], param)?;
            let targets = tok[3..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
            if targets.len() != kind.arity() {
                return Err(Error::Parse(format!("wrong target count in `{line}`")));
            }
            rows.push((t, Gate::new(kind, &targets)));
        }
        // Wires are numbered in creation order, so adds are replayed by wire id.
        let mut c = Circuit::new(p, inputs);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| (rows[i].0, if rows[i].1.kind == GateKind::AddBlank { 0 } else { 1 }, rows[i].1.target(0)));
        let mut adds: Vec<usize> = rows.iter().filter(|r| r.1.kind == GateKind::AddBlank).map(|r| r.1.target(0)).collect();
        adds.sort_unstable();
        for (i, &w) in adds.iter().enumerate() {
            if w != inputs + i {
                return Err(Error::Parse(format!("added wire {w} out of sequence")));
            }
        }
        for &w in &adds {
            let got = c.add();
            debug_assert_eq!(got, w);
        }
        // Stated levels are kept, so barriers survive the round trip.
        for i in order {
            let (t, g) = rows[i];
            if g.kind != GateKind::AddBlank {
                c.push_from(g.kind, &g.target_vec(), t)?;
            }
        }
        Ok(c)
    }
}
