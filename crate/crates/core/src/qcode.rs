//! Quantum computation codes built from nested classical pairs C2 in C1.
//!
//! Logical basis states are |S_a> = |C2|^{-1/2} sum_{w in C2} |w + rep(a)>, where rep(a) combines
//! complement rows of C1 over C2 with the digits of a (first digit most significant).

use crate::classical::{dual, make_reed_solomon, parse_code_block, LinearCode};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::FpMatrix;
use crate::state::gates::omega;
use crate::state::{SparseState, C64, PRUNE};
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    CssF2,
    CssFp,
    Polynomial,
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeKind::CssF2 => "css-f2",
            CodeKind::CssFp => "css-fp",
            CodeKind::Polynomial => "polynomial",
        })
    }
}

/// Logical value as an integer in [0, logical_dim).
pub type LogicalValue = u64;

#[derive(Debug, Clone)]
pub struct QuantumCode {
    kind: CodeKind,
    field: PrimeField,
    m: usize,
    c1: LinearCode,
    c2: LinearCode,
    c2_dual: LinearCode,
    degree: Option<usize>,
    t: usize,
    logical_dim: u64,
    reps: Vec<Vec<u32>>,
    c2_words: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    coord_inv: Vec<Vec<u32>>,
    /// Digits of each phase class (syndrome under the parity check of C2^perp).
    class_digits: Vec<Vec<u32>>,
    /// e_c . rep(a) for logical a and phase class c.
    rep_phase: Vec<Vec<u32>>,
}

/// Largest |C2| for which codeword tables are cached.
const C2_WORD_CAP: u64 = 1 << 16;

pub fn make_css_code(c1: &LinearCode, c2: &LinearCode) -> Result<QuantumCode> {
    QuantumCode::build(c1.clone(), c2.clone(), None)
}

/// Polynomial code of degree d with m = 3d + 1 evaluation points 1..m.
pub fn make_poly_code(p: u32, d: usize) -> Result<QuantumCode> {
    if d == 0 {
        return Err(Error::BadParams("polynomial code needs d >= 1".into()));
    }
    make_poly_code_degree(p, 3 * d + 1, d)
}

/// Polynomial code of the given degree on the m evaluation points 1..m; with m = 3d + 1 and
/// degree 2d this is the code of the |S'_a> words used by degree reduction.
pub fn make_poly_code_degree(p: u32, m: usize, degree: usize) -> Result<QuantumCode> {
    let field = PrimeField::new(p)?;
    if degree == 0 || degree >= m || m as u32 >= p {
        return Err(Error::BadParams(format!("polynomial code needs 1 <= degree < m < p, got degree={degree}, m={m}, p={p}")));
    }
    let points: Vec<u32> = (1..=m as u32).collect();
    let (c1, c2) = make_reed_solomon(field, degree, &points)?;
    QuantumCode::build(c1, c2, Some(degree))
}

impl QuantumCode {
    fn build(c1: LinearCode, c2: LinearCode, degree: Option<usize>) -> Result<Self> {
        let field = c1.field();
        if c2.field() != field {
            return Err(Error::FieldMismatch);
        }
        if c1.len() != c2.len() {
            return Err(Error::LengthMismatch { expected: c1.len(), got: c2.len() });
        }
        let m = c1.len();
        if !(0..c2.dim()).all(|r| c1.contains(c2.generator().row(r))) || c2.dim() > c1.dim() {
            return Err(Error::NotNested);
        }
        let p = field.p();
        let c2_size = (p as u64).checked_pow(c2.dim() as u32).filter(|&s| s <= C2_WORD_CAP);
        let c2_size = c2_size.ok_or_else(|| Error::TooLarge(format!("{}^{} words in C2", p, c2.dim())))?;
        let logical_dim = (p as u64).pow((c1.dim() - c2.dim()) as u32);

        // Basis of C1: the parity-check rows of C2^perp (a basis of C2) first, then greedily
        // chosen complement rows. With this choice the C2 coordinates of a word are exactly the
        // digits paired with the phase-class syndrome.
        let c2_dual = dual(&c2);
        let mut basis: Vec<Vec<u32>> = c2_dual.parity_check().row_vecs();
        let mut comp = Vec::new();
        for r in c1.generator().row_vecs() {
            let mut trial = basis.clone();
            trial.push(r.clone());
            if FpMatrix::from_rows(&trial, m).rank(field) == trial.len() {
                basis = trial;
                comp.push(r);
            }
        }
        let bm = FpMatrix::from_rows(&basis, m);
        let (_, pivots) = bm.rref(field);
        let k1 = basis.len();
        let sub = FpMatrix::from_rows(&basis.iter().map(|r| pivots.iter().map(|&j| r[j]).collect()).collect::<Vec<_>>(), k1);
        let coord_inv: Vec<Vec<u32>> = (0..k1)
            .map(|i| {
                let mut e = vec![0; k1];
                e[i] = 1;
                sub.solve_left(field, &e).expect("pivot submatrix is invertible")
            })
            .collect();

        let kl = comp.len();
        let reps: Vec<Vec<u32>> = (0..logical_dim)
            .map(|a| {
                let digits = digits_of(a, p, kl);
                let mut w = vec![0u32; m];
                for (dg, row) in digits.iter().zip(&comp) {
                    for (x, &y) in w.iter_mut().zip(row) {
                        *x = field.add(*x, field.mul(*dg, y));
                    }
                }
                w
            })
            .collect();
        let c2_words = c2.generator().span(field);
        debug_assert_eq!(c2_words.len() as u64, c2_size);

        let k2 = c2_dual.parity_check().rows();
        let class_digits: Vec<Vec<u32>> = (0..c2_dual.syndrome_count()).map(|i| digits_of(i, p, k2)).collect();
        let leaders: Vec<Vec<u32>> = class_digits.iter().map(|syn| c2_dual.decode_min_weight(syn).error.to_dense(m)).collect();
        let rep_phase: Vec<Vec<u32>> =
            reps.iter().map(|r| leaders.iter().map(|e| crate::matrix::dot(field, e, r)).collect()).collect();

        let t = c1.correction_radius().min(c2_dual.correction_radius());
        let kind = match (degree, p) {
            (Some(_), _) => CodeKind::Polynomial,
            (None, 2) => CodeKind::CssF2,
            (None, _) => CodeKind::CssFp,
        };
        Ok(Self { kind, field, m, c1, c2, c2_dual, degree, t, logical_dim, reps, c2_words, pivots, coord_inv, class_digits, rep_phase })
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c1(&self) -> &LinearCode {
        &self.c1
    }

    pub fn c2(&self) -> &LinearCode {
        &self.c2
    }

    pub fn c2_dual(&self) -> &LinearCode {
        &self.c2_dual
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    /// Interpolation coefficients c_l with sum_l c_l f(l) = f(0) for deg f < m (polynomial codes).
    pub fn interp_coeffs(&self) -> Option<Vec<u32>> {
        self.degree?;
        let points: Vec<u32> = (1..=self.m as u32).collect();
        crate::field::lagrange_at_zero(self.field, &points).ok()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn logical_dim(&self) -> u64 {
        self.logical_dim
    }

    /// Coset representative of logical value a.
    pub fn rep(&self, a: LogicalValue) -> Result<&[u32]> {
        self.reps.get(a as usize).map(|v| v.as_slice()).ok_or(Error::BadLogical(a))
    }

    pub fn c2_words(&self) -> &[Vec<u32>] {
        &self.c2_words
    }

    /// Logical value of a word of C1; None outside C1.
    pub fn logical_of(&self, x: &[u32]) -> Option<LogicalValue> {
        if !self.c1.contains(x) {
            return None;
        }
        Some(self.split(x).0)
    }

    /// Logical value and C2 coordinates of a word known to lie in C1.
    fn split(&self, x: &[u32]) -> (LogicalValue, Vec<u32>) {
        let f = self.field;
        let k1 = self.coord_inv.len();
        let mut coords = vec![0u32; k1];
        for (j, &col) in self.pivots.iter().enumerate() {
            let v = x[col];
            if v != 0 {
                for (c, &r) in coords.iter_mut().zip(&self.coord_inv[j]) {
                    *c = f.add(*c, f.mul(v, r));
                }
            }
        }
        let p = self.p() as u64;
        let k2 = self.c2.dim();
        let a = coords[k2..].iter().fold(0u64, |acc, &d| acc * p + d as u64);
        coords.truncate(k2);
        (a, coords)
    }

    /// Minimum-weight bit correction with respect to C1.
    pub fn bit_correct(&self, x: &[u32]) -> (Vec<u32>, Vec<u32>, bool) {
        let s = self.c1.syndrome(x).expect("block length");
        let dec = self.c1.decode_min_weight(&s);
        let mut y = x.to_vec();
        for (i, v) in dec.error.iter() {
            y[i] = self.field.sub(y[i], v);
        }
        (y, s, dec.beyond_radius)
    }

    /// Export: header `kind p m d t`, then C1 and C2 in the classical text format.
    pub fn to_text(&self) -> String {
        format!(
            "{} {} {} {} {}\n{}{}",
            self.kind,
            self.p(),
            self.m,
            self.degree.unwrap_or(0),
            self.t,
            self.c1.to_text(),
            self.c2.to_text()
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [kind, _p, _m, d, _t] = parts[..] else { return Err(Error::Parse(format!("bad header `{header}`"))) };
        let (f1, m1, r1) = parse_code_block(&mut lines)?;
        let (f2, m2, r2) = parse_code_block(&mut lines)?;
        let c1 = LinearCode::from_rows(f1, &r1, m1)?;
        let c2 = LinearCode::from_rows(f2, &r2, m2)?;
        let degree = match kind {
            "polynomial" => Some(d.parse().map_err(|_| Error::Parse(format!("bad degree `{d}`")))?),
            "css-f2" | "css-fp" => None,
            _ => return Err(Error::Parse(format!("unknown kind `{kind}`"))),
        };
        Self::build(c1, c2, degree)
    }
}

pub(crate) fn digits_of(mut a: u64, p: u32, k: usize) -> Vec<u32> {
    let mut v = vec![0u32; k];
    for i in (0..k).rev() {
        v[i] = (a % p as u64) as u32;
        a /= p as u64;
    }
    v
}

/// |S_a> on m qupits.
pub fn codeword(code: &QuantumCode, a: LogicalValue) -> Result<SparseState> {
    let rep = code.rep(a)?;
    let f = code.field;
    let amp = C64::new(1.0 / (code.c2_words.len() as f64).sqrt(), 0.0);
    let terms = code.c2_words.iter().map(|w| (w.iter().zip(rep).map(|(&x, &y)| f.add(x, y) as u8).collect(), amp));
    Ok(SparseState::from_terms(code.p(), code.m, terms))
}

/// Encodes a logical superposition sum_a alpha_a |a> as sum_a alpha_a |S_a>.
pub fn encode_logical(code: &QuantumCode, alpha: &[C64]) -> Result<SparseState> {
    if alpha.len() as u64 != code.logical_dim {
        return Err(Error::DimMismatch);
    }
    let mut terms = Vec::new();
    for (a, &al) in alpha.iter().enumerate() {
        for (k, v) in codeword(code, a as u64)?.into_terms() {
            terms.push((k, v * al));
        }
    }
    Ok(SparseState::from_terms(code.p(), code.m, terms))
}

fn block_check(code: &QuantumCode, state: &SparseState, block: &[usize]) -> Result<()> {
    crate::state::check_targets(state.n(), block)?;
    if block.len() != code.m || state.p() != code.p() {
        return Err(Error::DimMismatch);
    }
    Ok(())
}

/// Number of environment qupits appended by [`ideal_ec`].
pub fn ideal_ec_env_len(code: &QuantumCode) -> usize {
    code.c1.parity_check().rows() + code.c2_dual.parity_check().rows()
}

/// One recovered component: rest digits, bit syndrome, logical value, phase class, amplitude.
struct Recovered {
    rest: Vec<u8>,
    syndrome: Vec<u32>,
    logical: LogicalValue,
    class: usize,
    amp: C64,
}

/// Bit flips are corrected with respect to C1; phase errors are corrected with respect to C2^perp
/// by expanding each coset component in the character basis of C2 and mapping the component of
/// phase class c (leader e_c) to the codeword.
fn recover(code: &QuantumCode, state: &SparseState, block: &[usize]) -> Result<(Vec<usize>, Vec<Recovered>)> {
    block_check(code, state, block)?;
    let p = code.p();
    let n = state.n();
    let rest: Vec<usize> = (0..n).filter(|q| !block.contains(q)).collect();
    let syn_len = code.c1.parity_check().rows();
    let k2 = code.c2.dim();

    // (rest digits, bit syndrome) -> logical value -> (C2 coordinates, amplitude).
    type Group = FxHashMap<LogicalValue, Vec<(Vec<u32>, C64)>>;
    let mut groups: FxHashMap<(Vec<u8>, usize), Group> = FxHashMap::default();
    let mut x = vec![0u32; code.m];
    for (key, amp) in state.terms() {
        for (xi, &q) in x.iter_mut().zip(block) {
            *xi = key[q] as u32;
        }
        let (sidx, _) = code
            .c1
            .correct_in_place(&mut x)
            .ok_or_else(|| Error::Unsupported("bit decoder found no coset leader".into()))?;
        let (a, w) = code.split(&x);
        let r: Vec<u8> = rest.iter().map(|&q| key[q]).collect();
        groups.entry((r, sidx)).or_default().entry(a).or_default().push((w, *amp));
    }

    let norm = 1.0 / (code.c2_words.len() as f64).sqrt();
    let roots: Vec<C64> = (0..p).map(|k| omega(p, k as u64).conj()).collect();
    let mut out = Vec::new();
    for ((r, sidx), by_a) in groups {
        let syndrome = digits_of(sidx as u64, p, syn_len);
        for (a, words) in by_a {
            let spectrum = if words.len() > p as usize * k2 { Some(dft(p, k2, &roots, &words)) } else { None };
            for (c, cd) in code.class_digits.iter().enumerate() {
                let base = code.rep_phase[a as usize][c] as usize;
                let mut gamma = match &spectrum {
                    Some(sp) => sp[c],
                    None => words
                        .iter()
                        .map(|(w, amp)| {
                            let e: u64 = w.iter().zip(cd).map(|(&u, &v)| u as u64 * v as u64).sum();
                            roots[(e % p as u64) as usize] * amp
                        })
                        .sum(),
                };
                gamma *= roots[base % p as usize] * norm;
                if gamma.norm() >= PRUNE {
                    out.push(Recovered { rest: r.clone(), syndrome: syndrome.clone(), logical: a, class: c, amp: gamma });
                }
            }
        }
    }
    Ok((rest, out))
}

/// Sum over w of amp_w * conj(omega)^{w . c} for every c in F_p^k, one axis at a time.
fn dft(p: u32, k: usize, roots: &[C64], words: &[(Vec<u32>, C64)]) -> Vec<C64> {
    let pu = p as usize;
    let size = pu.pow(k as u32);
    let mut buf = vec![C64::new(0.0, 0.0); size];
    for (w, amp) in words {
        buf[w.iter().fold(0usize, |acc, &d| acc * pu + d as usize)] += amp;
    }
    let mut line = vec![C64::new(0.0, 0.0); pu];
    for axis in 0..k {
        let stride = pu.pow((k - 1 - axis) as u32);
        for start in 0..size {
            if !(start / stride).is_multiple_of(pu) {
                continue;
            }
            for (c, out) in line.iter_mut().enumerate() {
                *out = (0..pu).map(|x| buf[start + x * stride] * roots[(x * c) % pu]).sum();
            }
            for (c, v) in line.iter().enumerate() {
                buf[start + c * stride] = *v;
            }
        }
    }
    buf
}

fn env_digits(code: &QuantumCode, r: &Recovered) -> impl Iterator<Item = u8> {
    let cd = &code.class_digits[r.class];
    r.syndrome.iter().chain(cd).map(|&d| d as u8).collect::<Vec<_>>().into_iter()
}

/// Exact recovery channel on the `block` qupits, in purified form.
///
/// The bit syndrome and phase class are appended as environment digits, so the result has
/// `ideal_ec_env_len` extra qupits.
pub fn ideal_ec(code: &QuantumCode, state: &SparseState, block: &[usize]) -> Result<SparseState> {
    let (rest, rec) = recover(code, state, block)?;
    let n = state.n();
    let f = code.field;
    let norm = 1.0 / (code.c2_words.len() as f64).sqrt();
    let mut out: Vec<(Vec<u8>, C64)> = Vec::with_capacity(rec.len() * code.c2_words.len());
    for r in &rec {
        let rep = &code.reps[r.logical as usize];
        let env: Vec<u8> = env_digits(code, r).collect();
        for w in &code.c2_words {
            let mut key = vec![0u8; n];
            for (i, &q) in rest.iter().enumerate() {
                key[q] = r.rest[i];
            }
            for (i, &q) in block.iter().enumerate() {
                key[q] = f.add(w[i], rep[i]) as u8;
            }
            key.extend_from_slice(&env);
            out.push((key, r.amp * norm));
        }
    }
    Ok(SparseState::from_terms(code.p(), n + ideal_ec_env_len(code), out))
}

/// [`ideal_ec`] followed by the ideal decoder: the block is replaced by its logical value.
///
/// Output layout: the non-block qupits in their original order, one logical digit, then the
/// environment digits. Requires a single logical qupit (logical_dim = p).
pub fn ideal_ec_logical(code: &QuantumCode, state: &SparseState, block: &[usize]) -> Result<SparseState> {
    if code.logical_dim != code.p() as u64 {
        return Err(Error::Unsupported("logical output needs one logical qupit".into()));
    }
    let (rest, rec) = recover(code, state, block)?;
    let terms = rec.iter().map(|r| {
        let mut key = r.rest.clone();
        key.push(r.logical as u8);
        key.extend(env_digits(code, r));
        (key, r.amp)
    });
    Ok(SparseState::from_terms(code.p(), rest.len() + 1 + ideal_ec_env_len(code), terms.collect::<Vec<_>>()))
}

/// Distribution of the decoded logical value of `block`.
pub fn ideal_decode(code: &QuantumCode, state: &SparseState, block: &[usize]) -> Result<BTreeMap<LogicalValue, f64>> {
    block_check(code, state, block)?;
    let mut dist: BTreeMap<LogicalValue, f64> = BTreeMap::new();
    let total = state.norm_sqr();
    let mut x = vec![0u32; code.m];
    for (key, amp) in state.terms() {
        for (xi, &q) in x.iter_mut().zip(block) {
            *xi = key[q] as u32;
        }
        let (y, _, beyond) = code.bit_correct(&x);
        if beyond {
            return Err(Error::OutsideCode);
        }
        let a = code.logical_of(&y).ok_or(Error::OutsideCode)?;
        *dist.entry(a).or_default() += amp.norm_sqr() / total;
    }
    // Distinct inputs with equal syndrome stay distinct after correction, so no amplitudes interfere.
    dist.retain(|_, v| *v > 1e-15);
    Ok(dist)
}
