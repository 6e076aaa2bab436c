use super::{CMatrix, DensityMatrix, SparseState, C64, TOL};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stinespring form: append `add_count` blank qupits, apply `unitary` to system + ancilla,
/// trace out `discard`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    p: u32,
    system: usize,
    add_count: usize,
    unitary: CMatrix,
    discard: Vec<usize>,
}

impl Channel {
    pub fn new(p: u32, system: usize, add_count: usize, unitary: CMatrix) -> Result<Self> {
        if (p as usize).pow((system + add_count) as u32) != unitary.dim() {
            return Err(Error::DimMismatch);
        }
        if !unitary.is_unitary(TOL) {
            return Err(Error::NotUnitary);
        }
        Ok(Self { p, system, add_count, unitary, discard: (system..system + add_count).collect() })
    }

    pub fn identity(p: u32, d: usize) -> Self {
        Self::new(p, d, d, CMatrix::identity((p as usize).pow(2 * d as u32))).expect("identity is unitary")
    }

    pub fn add_count(&self) -> usize {
        self.add_count
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn discard(&self) -> &[usize] {
        &self.discard
    }

    /// Kraus operators K_e = (I (x) <e|) U (I (x) |0>).
    pub fn kraus(&self) -> Vec<CMatrix> {
        let ds = (self.p as usize).pow(self.system as u32);
        let da = (self.p as usize).pow(self.add_count as u32);
        (0..da).map(|e| CMatrix::from_fn(ds, |i, j| self.unitary.get(i * da + e, j * da))).collect()
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.p() != self.p || rho.n() != self.system {
            return Err(Error::DimMismatch);
        }
        let ds = rho.matrix().dim();
        let mut out = CMatrix::zeros(ds);
        for k in self.kraus() {
            out = out.add(&k.mul(rho.matrix()).mul(&k.adjoint()));
        }
        Ok(DensityMatrix::from_matrix_unchecked(self.p, self.system, out))
    }

    /// Purified action on `targets` of a sparse state; the ancilla stay appended as environment.
    pub fn apply_sparse(&self, state: &SparseState, targets: &[usize]) -> Result<SparseState> {
        if targets.len() != self.system {
            return Err(Error::BadTargets("channel arity mismatch".into()));
        }
        let mut s = state.clone();
        let base = s.n();
        s.append_zeros(self.add_count);
        let all: Vec<usize> = targets.iter().copied().chain(base..base + self.add_count).collect();
        s.apply_unitary(&self.unitary, &all)?;
        Ok(s)
    }
}

/// Random channel on d qupits with d ancilla, from the QR factor of a complex Gaussian matrix.
pub fn random_channel(p: u32, d: usize, seed: u64) -> Result<Channel> {
    if d == 0 || d > 2 {
        return Err(Error::BadParams("random_channel needs 1 <= d <= 2".into()));
    }
    let n = (p as usize).pow(2 * d as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re * s, im * s)
                })
                .collect()
        })
        .collect();
    // Modified Gram-Schmidt; positive R diagonal makes Q Haar distributed.
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let (left, right) = cols.split_at_mut(j);
                for (x, q) in right[0].iter_mut().zip(&left[i]) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    let u = CMatrix::from_fn(n, |i, j| cols[j][i]);
    Channel::new(p, d, d, u)
}
