//! Circuit execution on packed amplitude maps.
//!
//! Live wires are assigned slots of `ceil(log2 p)` bits in a `u128` key. Retiring wires that
//! are in product with the rest simply frees their slots. Otherwise the retired digits, together
//! with any earlier environment digits, are compressed by an isometry onto an orthonormal basis
//! of their correlation span and kept as environment digits. The state therefore stays a
//! purification of the circuit's mixed output, with the environment as small as the correlations
//! allow.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::state::gates::omega;
use crate::state::{SparseState, SparseVec, C64, PRUNE};
use rustc_hash::FxHashMap;

/// Largest environment dimension kept after a discard.
pub const ENV_CAP: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct PackedState {
    p: u32,
    bits: u32,
    mask: u128,
    slot: Vec<Option<u8>>,
    env: Vec<u8>,
    free: Vec<u8>,
    roots: Vec<C64>,
    terms: Vec<(u128, C64)>,
}

impl PackedState {
    /// Starts from `input` on wires `0..input.n()`.
    pub fn new(input: &SparseState) -> Result<Self> {
        let p = input.p();
        let bits = 32 - (p - 1).leading_zeros();
        let slots = (128 / bits) as usize;
        if input.n() > slots {
            return Err(Error::TooLarge(format!("{} live wires exceed {slots} packed slots", input.n())));
        }
        let mut e = Self {
            p,
            bits,
            mask: (1u128 << bits) - 1,
            slot: (0..input.n()).map(|w| Some(w as u8)).collect(),
            env: Vec::new(),
            free: (input.n() as u8..slots as u8).rev().collect(),
            roots: (0..p).map(|k| omega(p, k as u64)).collect(),
            terms: Vec::new(),
        };
        e.terms = input.terms().iter().map(|(k, a)| (e.pack(k), *a)).collect();
        Ok(e)
    }

    fn pack(&self, digits: &[u8]) -> u128 {
        digits.iter().enumerate().fold(0u128, |acc, (i, &d)| acc | (d as u128) << (i as u32 * self.bits))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(u128, C64)] {
        &self.terms
    }

    /// Number of environment digits currently held.
    pub fn env_len(&self) -> usize {
        self.env.len()
    }

    #[inline]
    fn shift(&self, w: usize) -> u32 {
        self.slot.get(w).copied().flatten().unwrap_or_else(|| panic!("wire {w} is not live")) as u32 * self.bits
    }

    pub fn is_live(&self, w: usize) -> bool {
        self.slot.get(w).is_some_and(|s| s.is_some())
    }

    /// Digits of `wires` in a packed key.
    pub fn digits(&self, key: u128, wires: &[usize]) -> Vec<u8> {
        wires.iter().map(|&w| ((key >> self.shift(w)) & self.mask) as u8).collect()
    }

    fn env_key(&self, key: u128) -> u128 {
        self.env.iter().fold(0u128, |acc, &s| acc << self.bits | ((key >> (s as u32 * self.bits)) & self.mask))
    }

    fn add_wire(&mut self, w: usize) -> Result<()> {
        if w >= self.slot.len() {
            self.slot.resize(w + 1, None);
        }
        let s = self.free.pop().ok_or_else(|| Error::TooLarge("live wires exceed packed key width".into()))?;
        self.slot[w] = Some(s);
        Ok(())
    }

    /// Runs every gate of `c` in push order.
    pub fn run(&mut self, c: &Circuit) -> Result<()> {
        self.run_range(c, 0, c.len())
    }

    /// Runs gates `from..to`; consecutive discards are retired jointly.
    pub fn run_range(&mut self, c: &Circuit, from: usize, to: usize) -> Result<()> {
        let gates = c.gates();
        let mut i = from;
        while i < to {
            if gates[i].kind == GateKind::Discard {
                let mut j = i;
                while j < to && gates[j].kind == GateKind::Discard {
                    j += 1;
                }
                let ws: Vec<usize> = gates[i..j].iter().map(|g| g.target(0)).collect();
                self.discard(&ws)?;
                i = j;
            } else {
                self.apply(&gates[i])?;
                i += 1;
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        let p = self.p;
        match g.kind {
            GateKind::AddBlank => return self.add_wire(g.target(0)),
            GateKind::Discard => return self.discard(&[g.target(0)]),
            GateKind::Restart => {
                let w = g.target(0);
                self.discard(&[w])?;
                return self.add_wire(w);
            }
            GateKind::Hadamard => {
                self.apply_fourier(g.target(0), 1);
                return Ok(());
            }
            GateKind::Fourier(r) => {
                self.apply_fourier(g.target(0), r);
                return Ok(());
            }
            _ => {}
        }
        let sh: Vec<u32> = g.targets().map(|w| self.shift(w)).collect();
        let (mask, roots) = (self.mask, &self.roots);
        let get = |k: u128, s: u32| ((k >> s) & mask) as u32;
        let set = |k: u128, s: u32, v: u32| (k & !(mask << s)) | (v as u128) << s;
        let i_unit = C64::new(0.0, 1.0);
        for (k, a) in &mut self.terms {
            match g.kind {
                GateKind::Not => *k ^= 1 << sh[0],
                GateKind::GenNot(c) => *k = set(*k, sh[0], (get(*k, sh[0]) + c) % p),
                GateKind::Cnot | GateKind::GenCnot => *k = set(*k, sh[1], (get(*k, sh[1]) + get(*k, sh[0])) % p),
                GateKind::Toffoli | GateKind::GenToffoli => {
                    *k = set(*k, sh[2], (get(*k, sh[2]) + get(*k, sh[0]) * get(*k, sh[1])) % p);
                }
                GateKind::Mul(c) => *k = set(*k, sh[0], get(*k, sh[0]) * c % p),
                GateKind::Swap => {
                    let (x, y) = (get(*k, sh[0]), get(*k, sh[1]));
                    *k = set(set(*k, sh[0], y), sh[1], x);
                }
                GateKind::Phase => {
                    if get(*k, sh[0]) == 1 {
                        *a *= i_unit;
                    }
                }
                GateKind::CPhase => {
                    if get(*k, sh[0]) & get(*k, sh[1]) == 1 {
                        *a = -*a;
                    }
                }
                GateKind::PhaseRot(c) => *a *= roots[(get(*k, sh[0]) * c % p) as usize],
                _ => unreachable!(),
            }
        }
        Ok(())
    }

    fn apply_fourier(&mut self, w: usize, r: u32) {
        let sh = self.shift(w);
        let p = self.p;
        let s = 1.0 / (p as f64).sqrt();
        let mut map: FxHashMap<u128, C64> = FxHashMap::default();
        map.reserve(self.terms.len() * p as usize);
        for &(k, a) in &self.terms {
            let x = ((k >> sh) & self.mask) as u32;
            let base = k & !(self.mask << sh);
            for y in 0..p {
                *map.entry(base | (y as u128) << sh).or_default() += a * self.roots[(r * x % p * y % p) as usize] * s;
            }
        }
        self.terms = map.into_iter().filter(|(_, a)| a.norm() >= PRUNE).collect();
    }

    /// Applies the single-wire generalized Pauli B^x P^z (shift after clock) to wire `w`.
    pub fn apply_pauli(&mut self, w: usize, x: u32, z: u32) {
        let sh = self.shift(w);
        let p = self.p;
        for (k, a) in &mut self.terms {
            let v = ((*k >> sh) & self.mask) as u32;
            *a *= self.roots[(z * v % p) as usize];
            *k = (*k & !(self.mask << sh)) | (((v + x) % p) as u128) << sh;
        }
    }

    /// Retires `ws` jointly, folding any remaining correlation into environment digits.
    pub fn discard(&mut self, ws: &[usize]) -> Result<()> {
        let mut dslots: Vec<u8> = ws
            .iter()
            .map(|&w| self.slot.get_mut(w).and_then(|s| s.take()).ok_or_else(|| Error::BadTargets(format!("wire {w} is not live"))))
            .collect::<Result<_>>()?;
        let first = self.terms.first().map_or(0, |t| t.0);
        let wmask = dslots.iter().fold(0u128, |m, &s| m | self.mask << (s as u32 * self.bits));
        if self.terms.iter().all(|t| (t.0 ^ first) & wmask == 0) {
            for t in &mut self.terms {
                t.0 &= !wmask;
            }
            self.free.extend(dslots);
            return Ok(());
        }
        dslots.extend(std::mem::take(&mut self.env));
        let dmask = dslots.iter().fold(0u128, |m, &s| m | self.mask << (s as u32 * self.bits));
        let mut groups: FxHashMap<u128, Vec<(u128, C64)>> = FxHashMap::default();
        for &(k, a) in &self.terms {
            groups.entry(k & !dmask).or_default().push((k & dmask, a));
        }
        let mut rests: Vec<u128> = groups.keys().copied().collect();
        rests.sort_unstable();
        // Orthonormal basis of the span of the retired vectors, in a fixed order.
        let mut basis: Vec<FxHashMap<u128, C64>> = Vec::new();
        for r in &rests {
            let mut v: FxHashMap<u128, C64> = groups[r].iter().copied().collect();
            let n0: f64 = v.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for _ in 0..2 {
                for u in &basis {
                    let ov: C64 = u.iter().filter_map(|(d, x)| v.get(d).map(|y| x.conj() * y)).sum();
                    if ov.norm() > 0.0 {
                        for (d, x) in u {
                            *v.entry(*d).or_default() -= ov * x;
                        }
                    }
                }
            }
            let n: f64 = v.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-9 * n0.max(1e-300) {
                v.retain(|_, a| a.norm() > PRUNE);
                for a in v.values_mut() {
                    *a /= n;
                }
                basis.push(v);
                if basis.len() > ENV_CAP {
                    return Err(Error::TooLarge(format!("environment dimension above {ENV_CAP}")));
                }
            }
        }
        self.free.extend(dslots);
        let mut k = basis.len();
        let mut env_digits = 0;
        while k > 1 {
            env_digits += 1;
            k = k.div_ceil(self.p as usize);
        }
        for _ in 0..env_digits {
            let s = self.free.pop().ok_or_else(|| Error::TooLarge("environment exceeds packed key width".into()))?;
            self.env.push(s);
        }
        let mut terms = Vec::with_capacity(rests.len() * basis.len().min(4));
        for r in rests {
            for (j, u) in basis.iter().enumerate() {
                let amp: C64 = groups[&r].iter().filter_map(|(d, a)| u.get(d).map(|x| x.conj() * a)).sum();
                if amp.norm() >= PRUNE {
                    terms.push((r | self.env_index(j), amp));
                }
            }
        }
        self.terms = terms;
        Ok(())
    }

    fn env_index(&self, mut j: usize) -> u128 {
        let mut key = 0u128;
        for &s in self.env.iter().rev() {
            key |= ((j % self.p as usize) as u128) << (s as u32 * self.bits);
            j /= self.p as usize;
        }
        key
    }

    /// Pure state on `wires` followed by the environment digits; remaining live wires must be
    /// listed or they are traced out as extra environment.
    pub fn purified(&self, wires: &[usize]) -> (SparseState, usize) {
        let rest: Vec<usize> = (0..self.slot.len()).filter(|&w| self.is_live(w) && !wires.contains(&w)).collect();
        let n_env = self.env.len() + rest.len();
        let mut keys: Vec<usize> = wires.to_vec();
        keys.extend(&rest);
        let st = SparseState::from_terms(
            self.p,
            wires.len() + n_env,
            self.terms.iter().map(|&(k, a)| {
                let mut d = self.digits(k, &keys);
                let e = self.env_key(k);
                for i in (0..self.env.len()).rev() {
                    d.push(((e >> (i as u32 * self.bits)) & self.mask) as u8);
                }
                (d, a)
            }),
        );
        (st, n_env)
    }

    /// State on `wires`; errors if anything else is correlated with them.
    pub fn pure_state(&self, wires: &[usize]) -> Result<SparseState> {
        let (st, n_env) = self.purified(wires);
        let keep: Vec<usize> = (0..wires.len()).collect();
        let vecs = st.reduced_vectors(&keep);
        if n_env == 0 || vecs.len() == 1 {
            let mut out = SparseState::from_map(self.p, wires.len(), vecs.into_iter().next().unwrap_or_default());
            out.normalize();
            return Ok(out);
        }
        let v0: SparseVec = vecs[0].clone();
        let n0: f64 = v0.values().map(|a| a.norm_sqr()).sum();
        for v in &vecs[1..] {
            let ov: C64 = v0.iter().filter_map(|(k, a)| v.get(k).map(|b| a.conj() * b)).sum();
            let nv: f64 = v.values().map(|a| a.norm_sqr()).sum();
            if (ov.norm_sqr() - n0 * nv).abs() > 1e-10 * n0 * nv {
                return Err(Error::Unsupported("wires are entangled with the environment".into()));
            }
        }
        let mut out = SparseState::from_map(self.p, wires.len(), v0);
        out.normalize();
        Ok(out)
    }

    /// Equality with `other` up to a global phase, slot layout included.
    pub fn same_as(&self, other: &PackedState, tol: f64) -> bool {
        if self.terms.len() != other.terms.len() || self.env != other.env || self.slot != other.slot {
            return false;
        }
        let map: FxHashMap<u128, C64> = other.terms.iter().copied().collect();
        let ov: C64 = self.terms.iter().map(|(k, x)| map.get(k).map_or(C64::new(0.0, 0.0), |y| x.conj() * y)).sum();
        (ov.norm() - 1.0).abs() < tol
    }
}

/// Runs `c` on `input` and returns the purified output on `outputs` (environment digits last).
pub fn run_purified(c: &Circuit, input: &SparseState, outputs: &[usize]) -> Result<(SparseState, usize)> {
    let mut st = PackedState::new(input)?;
    st.run(c)?;
    Ok(st.purified(outputs))
}
