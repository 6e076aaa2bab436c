//! Classical linear block codes over F_p.

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::{dot, FpMatrix};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Brute-force budget for codeword enumeration (p^k).
pub const ENUM_BUDGET: u64 = 10_000_000;
/// Largest syndrome space for which a complete coset-leader table is built.
const TABLE_BUDGET: u64 = 1 << 20;
/// Largest dual size for which the parity check is reduced to a low-weight basis.
const LOW_WEIGHT_BUDGET: u64 = 1 << 16;
/// Weight cap of the fallback search when no table exists.
const SEARCH_WEIGHT_CAP: usize = 3;

/// Sparse error: coordinate -> nonzero value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorVector {
    entries: BTreeMap<usize, u32>,
}

impl ErrorVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        Self { entries: pairs.into_iter().filter(|&(_, v)| v != 0).collect() }
    }

    pub fn from_dense(word: &[u32]) -> Self {
        Self::from_pairs(word.iter().copied().enumerate())
    }

    pub fn weight(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.entries.get(&i).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn to_dense(&self, m: usize) -> Vec<u32> {
        let mut w = vec![0; m];
        for (i, v) in self.iter() {
            w[i] = v;
        }
        w
    }
}

/// Result of syndrome decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub error: ErrorVector,
    /// Set when the minimal solution exceeds the correction radius (or none was found).
    pub beyond_radius: bool,
}

/// Coset-leader table: per syndrome, the nonzero (position, digit) pairs of its leader.
type Leader = Box<[(u16, u32)]>;
type LeaderTable = Vec<Option<Leader>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    field: PrimeField,
    m: usize,
    generator: FpMatrix,
    parity_check: FpMatrix,
    known_min_distance: Option<usize>,
    table: Option<Arc<Vec<Leader>>>,
}

impl LinearCode {
    /// Builds a code from generator rows, which must be linearly independent.
    pub fn new(field: PrimeField, generator: FpMatrix) -> Result<Self> {
        let m = generator.cols();
        let k = generator.rows();
        if generator.rank(field) != k {
            return Err(Error::BadParams("generator rows are linearly dependent".into()));
        }
        let p = field.p() as u64;
        let dual_basis = generator.nullspace(field);
        let parity_check = if p.checked_pow((m - k) as u32).is_some_and(|s| s <= LOW_WEIGHT_BUDGET) {
            low_weight_basis(field, &dual_basis)
        } else {
            dual_basis
        };
        let mut code = Self { field, m, generator, parity_check, known_min_distance: None, table: None };
        code.known_min_distance = code.compute_min_distance();
        if p.checked_pow((m - k) as u32).is_some_and(|s| s <= TABLE_BUDGET) {
            code.table = Some(Arc::new(code.build_table()));
        }
        Ok(code)
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u32>], m: usize) -> Result<Self> {
        Self::new(field, FpMatrix::from_rows(rows, m))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &FpMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &FpMatrix {
        &self.parity_check
    }

    pub fn known_min_distance(&self) -> Option<usize> {
        self.known_min_distance
    }

    /// Number of errors guaranteed correctable; the zero code corrects everything.
    pub fn correction_radius(&self) -> usize {
        if self.dim() == 0 {
            return self.m;
        }
        self.known_min_distance.map_or(0, |d| (d - 1) / 2)
    }

    pub fn syndrome(&self, word: &[u32]) -> Result<Vec<u32>> {
        if word.len() != self.m {
            return Err(Error::LengthMismatch { expected: self.m, got: word.len() });
        }
        Ok(self.parity_check.mul_vec(self.field, word))
    }

    pub fn contains(&self, word: &[u32]) -> bool {
        self.syndrome(word).is_ok_and(|s| s.iter().all(|&x| x == 0))
    }

    /// All p^k codewords, lexicographic in the message.
    pub fn codewords(&self) -> Result<Vec<Vec<u32>>> {
        let total = (self.field.p() as u64).checked_pow(self.dim() as u32);
        if total.is_none_or(|t| t > ENUM_BUDGET) {
            return Err(Error::TooLarge(format!("{}^{} codewords", self.field.p(), self.dim())));
        }
        Ok(self.generator.span(self.field))
    }

    pub fn decode_min_weight(&self, syndrome: &[u32]) -> Decoded {
        let error = match &self.table {
            Some(t) => Some(ErrorVector::from_pairs(t[self.syndrome_index(syndrome)].iter().map(|&(i, v)| (i as usize, v)))),
            None => self.search(syndrome),
        };
        match error {
            Some(error) => {
                let beyond_radius = error.weight() > self.correction_radius();
                Decoded { error, beyond_radius }
            }
            None => Decoded { error: ErrorVector::new(), beyond_radius: true },
        }
    }

    /// Subtracts the coset leader of the word's syndrome; returns the syndrome index and whether the
    /// leader exceeds the correction radius, or None when no leader was found.
    pub fn correct_in_place(&self, word: &mut [u32]) -> Option<(usize, bool)> {
        let f = self.field;
        let p = f.p() as u64;
        let mut idx = 0usize;
        for r in 0..self.parity_check.rows() {
            let s = self.parity_check.row(r).iter().zip(word.iter()).map(|(&h, &x)| h as u64 * x as u64).sum::<u64>() % p;
            idx = idx * p as usize + s as usize;
        }
        let radius = self.correction_radius();
        match &self.table {
            Some(t) => {
                let leader = &t[idx];
                for &(i, v) in leader.iter() {
                    word[i as usize] = f.sub(word[i as usize], v);
                }
                Some((idx, leader.len() > radius))
            }
            None => {
                let syn = self.syndrome(word).ok()?;
                let e = self.search(&syn)?;
                for (i, v) in e.iter() {
                    word[i] = f.sub(word[i], v);
                }
                Some((idx, e.weight() > radius))
            }
        }
    }

    /// Integer index of a syndrome, first digit most significant.
    pub fn syndrome_index(&self, s: &[u32]) -> usize {
        let p = self.field.p() as usize;
        s.iter().fold(0usize, |acc, &x| acc * p + x as usize)
    }

    pub fn syndrome_count(&self) -> u64 {
        (self.field.p() as u64).pow(self.parity_check.rows() as u32)
    }

    fn compute_min_distance(&self) -> Option<usize> {
        if self.dim() == 0 {
            return None;
        }
        if self.dim() == self.m {
            return Some(1);
        }
        if let Ok(words) = self.codewords() {
            return words.iter().map(|w| w.iter().filter(|&&x| x != 0).count()).filter(|&w| w > 0).min();
        }
        // Smallest nonzero e with H e = 0, searched by weight.
        let zero = vec![0; self.parity_check.rows()];
        (1..=SEARCH_WEIGHT_CAP + 1).find(|&w| {
            let mut hit = false;
            for_each_error(self.field, self.m, w, &mut |e| {
                if self.parity_check.mul_vec(self.field, &e.to_dense(self.m)) == zero {
                    hit = true;
                }
                hit
            });
            hit
        })
    }

    fn build_table(&self) -> Vec<Leader> {
        let size = self.syndrome_count() as usize;
        let r = self.parity_check.rows();
        let p = self.field.p();
        // Syndrome digits are updated incrementally along the enumeration.
        let cols: Vec<Vec<u32>> = (0..self.m).map(|j| (0..r).map(|i| self.parity_check.get(i, j)).collect()).collect();
        let mut table: LeaderTable = vec![None; size];
        let mut filled = 0usize;
        struct Walk<'a> {
            field: PrimeField,
            cols: &'a [Vec<u32>],
            table: &'a mut LeaderTable,
            filled: &'a mut usize,
            cur: Vec<(u16, u32)>,
            synd: Vec<u32>,
        }
        fn rec(w: &mut Walk<'_>, m: usize, p: u32, start: usize, left: usize) -> bool {
            if left == 0 {
                let idx = w.synd.iter().fold(0usize, |a, &x| a * p as usize + x as usize);
                if w.table[idx].is_none() {
                    w.table[idx] = Some(w.cur.clone().into_boxed_slice());
                    *w.filled += 1;
                }
                return *w.filled == w.table.len();
            }
            for pos in start..=m.saturating_sub(left) {
                for val in 1..p {
                    for (s, &h) in w.synd.iter_mut().zip(&w.cols[pos]) {
                        *s = w.field.add(*s, w.field.mul(val, h));
                    }
                    w.cur.push((pos as u16, val));
                    let stop = rec(w, m, p, pos + 1, left - 1);
                    w.cur.pop();
                    for (s, &h) in w.synd.iter_mut().zip(&w.cols[pos]) {
                        *s = w.field.sub(*s, w.field.mul(val, h));
                    }
                    if stop {
                        return true;
                    }
                }
            }
            false
        }
        let mut walk = Walk { field: self.field, cols: &cols, table: &mut table, filled: &mut filled, cur: Vec::new(), synd: vec![0; r] };
        for w in 0..=self.m {
            if rec(&mut walk, self.m, p, 0, w) {
                break;
            }
        }
        table.into_iter().map(|e| e.expect("every syndrome has a leader")).collect()
    }

    fn search(&self, syndrome: &[u32]) -> Option<ErrorVector> {
        let mut found = None;
        for w in 0..=SEARCH_WEIGHT_CAP.min(self.m) {
            for_each_error(self.field, self.m, w, &mut |e| {
                if self.parity_check.mul_vec(self.field, &e.to_dense(self.m)) == syndrome {
                    found = Some(e.clone());
                }
                found.is_some()
            });
            if found.is_some() {
                break;
            }
        }
        found
    }

    /// Text form: header `p m k`, then k generator rows.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.field.p(), self.m, self.dim());
        for r in 0..self.dim() {
            let row: Vec<String> = self.generator.row(r).iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let (field, m, rows) = parse_code_block(&mut lines)?;
        Self::from_rows(field, &rows, m)
    }
}

pub(crate) fn parse_code_block<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
) -> Result<(PrimeField, usize, Vec<Vec<u32>>)> {
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    let nums = parse_nums(header)?;
    let [p, m, k] = nums[..] else { return Err(Error::Parse(format!("bad header `{header}`"))) };
    let field = PrimeField::new(p)?;
    let mut rows = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let line = lines.next().ok_or_else(|| Error::Parse("missing generator row".into()))?;
        let row = parse_nums(line)?;
        if row.len() != m as usize || row.iter().any(|&v| v >= p) {
            return Err(Error::Parse(format!("bad row `{line}`")));
        }
        rows.push(row);
    }
    Ok((field, m as usize, rows))
}

fn parse_nums(line: &str) -> Result<Vec<u32>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer `{t}`"))))
        .collect()
}

/// Visits weight-`w` errors in lexicographic (position, value) order until `f` returns true.
pub(crate) fn for_each_error(field: PrimeField, m: usize, w: usize, f: &mut dyn FnMut(&ErrorVector) -> bool) {
    fn rec(
        p: u32,
        m: usize,
        start: usize,
        left: usize,
        cur: &mut Vec<(usize, u32)>,
        f: &mut dyn FnMut(&ErrorVector) -> bool,
    ) -> bool {
        if left == 0 {
            return f(&ErrorVector::from_pairs(cur.iter().copied()));
        }
        for pos in start..=m.saturating_sub(left) {
            for val in 1..p {
                cur.push((pos, val));
                let stop = rec(p, m, pos + 1, left - 1, cur, f);
                cur.pop();
                if stop {
                    return true;
                }
            }
        }
        false
    }
    if w <= m {
        rec(field.p(), m, 0, w, &mut Vec::with_capacity(w), f);
    }
}

/// Basis of span(rows) made of minimum-weight words, chosen greedily in (weight, lex) order.
fn low_weight_basis(field: PrimeField, basis: &FpMatrix) -> FpMatrix {
    let target = basis.rows();
    if target == 0 {
        return basis.clone();
    }
    let mut words = basis.span(field);
    words.retain(|w| w.iter().any(|&x| x != 0));
    // Normalise scalar multiples away: keep words whose first nonzero entry is 1.
    words.retain(|w| w.iter().find(|&&x| x != 0) == Some(&1));
    words.sort_by_key(|w| (w.iter().filter(|&&x| x != 0).count(), w.clone()));
    let mut chosen: Vec<Vec<u32>> = Vec::with_capacity(target);
    for w in words {
        chosen.push(w);
        if FpMatrix::from_rows(&chosen, basis.cols()).rank(field) < chosen.len() {
            chosen.pop();
        } else if chosen.len() == target {
            break;
        }
    }
    FpMatrix::from_rows(&chosen, basis.cols())
}

pub fn min_distance(code: &LinearCode) -> Result<usize> {
    if code.dim() == 0 {
        return Err(Error::BadParams("the zero code has no nonzero codewords".into()));
    }
    let words = code.codewords()?;
    Ok(words.iter().map(|w| w.iter().filter(|&&x| x != 0).count()).filter(|&w| w > 0).min().unwrap_or(0))
}

pub fn syndrome(code: &LinearCode, word: &[u32]) -> Result<Vec<u32>> {
    code.syndrome(word)
}

pub fn decode_min_weight(code: &LinearCode, s: &[u32]) -> Decoded {
    code.decode_min_weight(s)
}

pub fn dual(code: &LinearCode) -> LinearCode {
    LinearCode::new(code.field, code.parity_check.clone()).expect("parity-check rows are independent")
}

/// Reed-Solomon evaluation pair: C1 = {f(points) : deg f <= d}, C2 = {f in C1 : f(0) = 0}.
pub fn make_reed_solomon(field: PrimeField, d: usize, points: &[u32]) -> Result<(LinearCode, LinearCode)> {
    let m = points.len();
    let p = field.p();
    if m == 0 || m as u32 > p - 1 || d >= m {
        return Err(Error::BadParams(format!("need d < m <= p-1, got d={d}, m={m}, p={p}")));
    }
    for (i, &a) in points.iter().enumerate() {
        if a % p == 0 {
            return Err(Error::BadParams("evaluation points must be nonzero".into()));
        }
        if points[..i].iter().any(|&b| b % p == a % p) {
            return Err(Error::BadParams(format!("duplicate evaluation point {a}")));
        }
    }
    let row = |j: usize| -> Vec<u32> { points.iter().map(|&a| field.pow(a, j as u64)).collect() };
    let c1: Vec<Vec<u32>> = (0..=d).map(row).collect();
    let c2: Vec<Vec<u32>> = (1..=d).map(row).collect();
    Ok((LinearCode::from_rows(field, &c1, m)?, LinearCode::from_rows(field, &c2, m)?))
}

/// The [8,4] extended Hamming code (first-order Reed-Muller RM(1,3)).
pub fn extended_hamming() -> LinearCode {
    let f2 = PrimeField::new(2).expect("2 is prime");
    let rows = vec![
        vec![1, 1, 1, 1, 1, 1, 1, 1],
        vec![0, 1, 0, 1, 0, 1, 0, 1],
        vec![0, 0, 1, 1, 0, 0, 1, 1],
        vec![0, 0, 0, 0, 1, 1, 1, 1],
    ];
    LinearCode::from_rows(f2, &rows, 8).expect("independent rows")
}

/// Whether C = C^perp and every codeword weight is divisible by 4 (p = 2 only).
pub fn is_doubly_even_selfdual(code: &LinearCode) -> bool {
    if code.field.p() != 2 || 2 * code.dim() != code.m {
        return false;
    }
    let Ok(words) = code.codewords() else { return false };
    let self_orth = (0..code.dim())
        .all(|i| (0..code.dim()).all(|j| dot(code.field, code.generator.row(i), code.generator.row(j)) == 0));
    self_orth && words.iter().all(|w| w.iter().sum::<u32>() % 4 == 0)
}

/// Punctures (deletes) coordinate `pos` of every generator row.
pub fn puncture(code: &LinearCode, pos: usize) -> Result<LinearCode> {
    let rows: Vec<Vec<u32>> = code
        .generator
        .row_vecs()
        .into_iter()
        .map(|mut r| {
            r.remove(pos);
            r
        })
        .collect();
    LinearCode::from_rows(code.field, &rows, code.m - 1)
}

/// The Steane pair: C1 = [7,4] Hamming (punctured [8,4]), C2 = C1^perp.
pub fn make_steane_pair() -> (LinearCode, LinearCode) {
    let ext = extended_hamming();
    debug_assert!(is_doubly_even_selfdual(&ext));
    let c1 = puncture(&ext, 7).expect("puncture keeps rank");
    let c2 = dual(&c1);
    (c1, c2)
}
