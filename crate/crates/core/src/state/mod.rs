//! Exact state simulation of n qupits.
//!
//! Qupit 0 is the most significant digit of every basis index.

mod channel;
mod dense;
mod density;
pub mod gates;
mod pauli;
mod sparse;

pub use channel::{random_channel, Channel};
pub use dense::{DenseState, DENSE_CAP};
pub use density::{hermitian_eigh, hermitian_eigenvalues, mixture_trace_distance, reduced_trace_distance, trace_distance, DensityMatrix};
pub use pauli::{pauli_decompose, pauli_matrix, PauliLabel};
pub use sparse::{SparseState, SparseVec, PRUNE};

use crate::error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Unitarity and Hermiticity tolerance.
pub const TOL: f64 = 1e-10;
/// Largest reduced dimension produced by partial traces.
pub const REDUCED_CAP: usize = 1 << 14;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i][j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] += v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn kron(&self, o: &CMatrix) -> CMatrix {
        let n = o.n;
        CMatrix::from_fn(self.n * n, |i, j| self.get(i / n, j / n) * o.get(i % n, j % n))
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn sub(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.n, o.n);
        Self { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.n, o.n);
        Self { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise distance.
    pub fn max_diff(&self, o: &CMatrix) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).max_diff(&CMatrix::identity(self.n)) < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_diff(&self.adjoint()) < tol
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }
}

pub(crate) fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::BadTargets(format!("target {t} out of range for {n} qupits")));
        }
        if targets[..i].contains(&t) {
            return Err(Error::BadTargets(format!("target {t} repeated")));
        }
    }
    Ok(())
}

pub(crate) fn pow_usize(p: u32, k: usize) -> Option<usize> {
    (p as usize).checked_pow(k as u32)
}
