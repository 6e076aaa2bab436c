use super::{check_targets, pow_usize, CMatrix, SparseState, C64, TOL};
use crate::error::{Error, Result};

/// Largest statevector the dense engine will allocate.
pub const DENSE_CAP: usize = 25_000_000;

/// Full statevector of n qupits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    p: u32,
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn basis(p: u32, digits: &[u32]) -> Result<Self> {
        let n = digits.len();
        let size = pow_usize(p, n).filter(|&s| s <= DENSE_CAP).ok_or_else(|| Error::TooLarge(format!("{p}^{n} amplitudes")))?;
        let mut amps = vec![C64::new(0.0, 0.0); size];
        amps[index_of(p, digits)] = C64::new(1.0, 0.0);
        Ok(Self { p, n, amps })
    }

    /// Normalises the given amplitudes.
    pub fn from_amplitudes(p: u32, n: usize, amps: Vec<C64>) -> Result<Self> {
        if pow_usize(p, n) != Some(amps.len()) {
            return Err(Error::DimMismatch);
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::BadParams("zero vector".into()));
        }
        Ok(Self { p, n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, o: &DenseState) -> C64 {
        self.amps.iter().zip(&o.amps).map(|(a, b)| a.conj() * b).sum()
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
        let t = targets.len();
        let strides: Vec<usize> = targets.iter().map(|&q| p.pow((self.n - 1 - q) as u32)).collect();
        let k = u.dim();
        let offsets: Vec<usize> = (0..k)
            .map(|a| {
                let mut rem = a;
                let mut off = 0;
                for j in (0..t).rev() {
                    off += (rem % p) * strides[j];
                    rem /= p;
                }
                off
            })
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); k];
        for base in 0..self.amps.len() {
            if strides.iter().any(|&s| (base / s) % p != 0) {
                continue;
            }
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + o];
            }
            for (i, &o) in offsets.iter().enumerate() {
                self.amps[base + o] = (0..k).map(|j| u.get(i, j) * buf[j]).sum();
            }
        }
    }

    pub fn to_sparse(&self) -> SparseState {
        let terms = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| (super::gates::index_digits(i, self.p, self.n).into_iter().map(|d| d as u8).collect(), a));
        SparseState::from_terms(self.p, self.n, terms)
    }
}

pub(crate) fn index_of(p: u32, digits: &[u32]) -> usize {
    digits.iter().fold(0usize, |acc, &d| acc * p as usize + d as usize)
}
