use super::{check_targets, pow_usize, CMatrix, DenseState, DensityMatrix, C64, REDUCED_CAP, TOL};
use crate::error::{Error, Result};
use rustc_hash::FxHashMap;

/// Amplitudes below this magnitude are dropped.
pub const PRUNE: f64 = 1e-14;

/// Sparse vector keyed by digit strings.
pub type SparseVec = FxHashMap<Vec<u8>, C64>;

/// Amplitude map over basis strings; digits are stored one byte each (p <= 255).
#[derive(Debug, Clone)]
pub struct SparseState {
    p: u32,
    n: usize,
    terms: Vec<(Vec<u8>, C64)>,
}

impl SparseState {
    pub fn basis(p: u32, digits: &[u32]) -> Self {
        assert!(p <= 255, "sparse engine stores one byte per digit");
        Self { p, n: digits.len(), terms: vec![(digits.iter().map(|&d| d as u8).collect(), C64::new(1.0, 0.0))] }
    }

    /// Merges duplicate keys and prunes tiny amplitudes; does not normalise.
    pub fn from_terms(p: u32, n: usize, terms: impl IntoIterator<Item = (Vec<u8>, C64)>) -> Self {
        assert!(p <= 255, "sparse engine stores one byte per digit");
        let mut map: SparseVec = FxHashMap::default();
        for (k, a) in terms {
            debug_assert_eq!(k.len(), n);
            *map.entry(k).or_default() += a;
        }
        Self::from_map(p, n, map)
    }

    pub fn from_map(p: u32, n: usize, map: SparseVec) -> Self {
        let terms = map.into_iter().filter(|(_, a)| a.norm() >= PRUNE).collect();
        Self { p, n, terms }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Vec<u8>, C64)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Vec<u8>, C64)> {
        self.terms
    }

    pub fn sorted_terms(&self) -> Vec<(Vec<u8>, C64)> {
        let mut t = self.terms.clone();
        t.sort_by(|a, b| a.0.cmp(&b.0));
        t
    }

    pub fn to_map(&self) -> SparseVec {
        self.terms.iter().cloned().collect()
    }

    pub fn amplitude(&self, key: &[u8]) -> C64 {
        self.terms.iter().find(|(k, _)| k == key).map_or(C64::new(0.0, 0.0), |t| t.1)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for t in &mut self.terms {
                t.1 /= n;
            }
        }
    }

    pub fn scale(&mut self, s: C64) {
        for t in &mut self.terms {
            t.1 *= s;
        }
    }

    /// <self|other>.
    pub fn inner(&self, other: &SparseState) -> C64 {
        let (small, large, conj_small) =
            if self.len() <= other.len() { (self, other, true) } else { (other, self, false) };
        let map: FxHashMap<&[u8], C64> = large.terms.iter().map(|(k, a)| (k.as_slice(), *a)).collect();
        let s: C64 = small
            .terms
            .iter()
            .filter_map(|(k, a)| map.get(k.as_slice()).map(|b| if conj_small { a.conj() * b } else { b.conj() * a }))
            .sum();
        s
    }

    /// Fidelity |<self|other>|^2 of normalised copies.
    pub fn fidelity(&self, other: &SparseState) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn add_scaled(&mut self, other: &SparseState, s: C64) {
        assert_eq!(self.n, other.n);
        let mut map = std::mem::take(&mut self.terms).into_iter().collect::<SparseVec>();
        for (k, a) in &other.terms {
            *map.entry(k.clone()).or_default() += a * s;
        }
        *self = Self::from_map(self.p, self.n, map);
    }

    /// Appends `k` qupits in |0>.
    pub fn append_zeros(&mut self, k: usize) {
        for t in &mut self.terms {
            t.0.extend(std::iter::repeat_n(0, k));
        }
        self.n += k;
    }

    /// Tensor product self (x) other.
    pub fn tensor(&self, other: &SparseState) -> SparseState {
        assert_eq!(self.p, other.p);
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut k = a.clone();
                k.extend_from_slice(b);
                terms.push((k, x * y));
            }
        }
        SparseState { p: self.p, n: self.n + other.n, terms }
    }

    /// Reorders qupits so that new qupit i is old qupit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> SparseState {
        assert_eq!(order.len(), self.n);
        let terms = self.terms.iter().map(|(k, a)| (order.iter().map(|&i| k[i]).collect(), *a)).collect();
        SparseState { p: self.p, n: self.n, terms }
    }

    pub fn apply_unitary(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        check_targets(self.n, targets)?;
        if pow_usize(self.p, targets.len()) != Some(u.dim()) {
            return Err(Error::DimMismatch);
        }
        if !u.is_unitary(TOL) {
            return Err(Error::NotUnitary);
        }
        self.apply_unchecked(u, targets);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, u: &CMatrix, targets: &[usize]) {
        let p = self.p as usize;
        let k = u.dim();
        let t = targets.len();
        let cols: Vec<Vec<(usize, C64)>> = (0..k)
            .map(|j| (0..k).filter_map(|i| Some((i, u.get(i, j))).filter(|(_, v)| v.norm() >= PRUNE)).collect())
            .collect();
        let mut map: SparseVec = FxHashMap::default();
        map.reserve(self.terms.len() * 2);
        for (key, amp) in std::mem::take(&mut self.terms) {
            let col = targets.iter().fold(0usize, |acc, &q| acc * p + key[q] as usize);
            for &(row, v) in &cols[col] {
                let mut nk = key.clone();
                let mut rem = row;
                for j in (0..t).rev() {
                    nk[targets[j]] = (rem % p) as u8;
                    rem /= p;
                }
                *map.entry(nk).or_default() += v * amp;
            }
        }
        self.terms = map.into_iter().filter(|(_, a)| a.norm() >= PRUNE).collect();
    }

    /// Applies a classical reversible map with phases to the target digits.
    ///
    /// `f` receives the target digits and returns their image and the phase. The map is checked
    /// for bijectivity over all p^t inputs.
    pub fn apply_perm_phase(&mut self, targets: &[usize], f: impl Fn(&[u8]) -> (Vec<u8>, C64)) -> Result<()> {
        check_targets(self.n, targets)?;
        let t = targets.len();
        let size = pow_usize(self.p, t).ok_or_else(|| Error::TooLarge("perm domain".into()))?;
        let mut seen = vec![false; size];
        for idx in 0..size {
            let d: Vec<u8> = super::gates::index_digits(idx, self.p, t).into_iter().map(|x| x as u8).collect();
            let (img, ph) = f(&d);
            if img.len() != t || img.iter().any(|&x| x as u32 >= self.p) || (ph.norm() - 1.0).abs() > TOL {
                return Err(Error::NotBijective);
            }
            let j = img.iter().fold(0usize, |acc, &x| acc * self.p as usize + x as usize);
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::NotBijective);
            }
        }
        let mut buf = vec![0u8; t];
        for (key, amp) in &mut self.terms {
            for (b, &q) in buf.iter_mut().zip(targets) {
                *b = key[q];
            }
            let (img, ph) = f(&buf);
            for (&q, &v) in targets.iter().zip(&img) {
                key[q] = v;
            }
            *amp *= ph;
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        let size = pow_usize(self.p, self.n)
            .filter(|&s| s <= super::DENSE_CAP)
            .ok_or_else(|| Error::TooLarge(format!("{}^{} amplitudes", self.p, self.n)))?;
        let mut amps = vec![C64::new(0.0, 0.0); size];
        for (k, a) in &self.terms {
            amps[k.iter().fold(0usize, |acc, &d| acc * self.p as usize + d as usize)] += a;
        }
        DenseState::from_amplitudes(self.p, self.n, amps)
    }

    /// Vectors v_e over the kept qupits, one per basis value e of the rest: rho_keep = sum_e v_e v_e^dag.
    pub fn reduced_vectors(&self, keep: &[usize]) -> Vec<SparseVec> {
        let rest: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let mut groups: FxHashMap<Vec<u8>, SparseVec> = FxHashMap::default();
        for (k, a) in &self.terms {
            let env: Vec<u8> = rest.iter().map(|&q| k[q]).collect();
            let sys: Vec<u8> = keep.iter().map(|&q| k[q]).collect();
            *groups.entry(env).or_default().entry(sys).or_default() += a;
        }
        let mut out: Vec<(Vec<u8>, SparseVec)> = groups.into_iter().collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.into_iter().map(|(_, v)| v).collect()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        check_targets(self.n, keep)?;
        let dim = pow_usize(self.p, keep.len())
            .filter(|&d| d <= REDUCED_CAP)
            .ok_or_else(|| Error::TooLarge(format!("{}^{} reduced dimension", self.p, keep.len())))?;
        let mut m = CMatrix::zeros(dim);
        let p = self.p as usize;
        for v in self.reduced_vectors(keep) {
            let entries: Vec<(usize, C64)> =
                v.iter().map(|(k, a)| (k.iter().fold(0usize, |acc, &d| acc * p + d as usize), *a)).collect();
            for &(i, a) in &entries {
                for &(j, b) in &entries {
                    m.add_to(i, j, a * b.conj());
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(self.p, keep.len(), m))
    }

    /// Debug dump: `basis-string TAB re TAB im`, sorted by basis string.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, a) in self.sorted_terms() {
            let key: String = if self.p <= 10 {
                k.iter().map(|d| char::from(b'0' + d)).collect()
            } else {
                k.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            };
            out.push_str(&format!("{key}\t{:e}\t{:e}\n", a.re, a.im));
        }
        out
    }
}
