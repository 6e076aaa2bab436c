use super::gates::{clock, omega, shift};
use super::{CMatrix, C64};
use std::collections::BTreeMap;
use std::fmt;

/// Generalized Pauli B^c P^{c'} per qupit, stored as (c, c').
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel(pub Vec<(u32, u32)>);

impl PauliLabel {
    pub fn identity(d: usize) -> Self {
        Self(vec![(0, 0); d])
    }

    pub fn single(c: u32, c2: u32) -> Self {
        Self(vec![(c, c2)])
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&(a, b)| a == 0 && b == 0)
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&(a, b)| a != 0 || b != 0).count()
    }

    /// All p^2 - 1 nontrivial single-qupit labels.
    pub fn nontrivial_single(p: u32) -> Vec<PauliLabel> {
        (0..p).flat_map(|c| (0..p).map(move |c2| (c, c2))).filter(|&x| x != (0, 0)).map(|(c, c2)| Self::single(c, c2)).collect()
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &(c, c2)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({c},{c2})")?;
        }
        Ok(())
    }
}

/// Matrix of a label; qupit 0 is the most significant tensor factor.
pub fn pauli_matrix(p: u32, label: &PauliLabel) -> CMatrix {
    label.0.iter().fold(CMatrix::identity(1), |acc, &(c, c2)| acc.kron(&shift(p, c).mul(&clock(p, c2))))
}

/// Coefficients c_e with M = sum_e c_e sigma_e; zero coefficients are omitted.
pub fn pauli_decompose(p: u32, m: &CMatrix) -> BTreeMap<PauliLabel, C64> {
    let dim = m.dim();
    let mut d = 0;
    while (p as usize).pow(d as u32) < dim {
        d += 1;
    }
    assert_eq!((p as usize).pow(d as u32), dim, "matrix dimension is not a power of p");
    let pu = p as usize;
    let digits = |mut i: usize| {
        let mut v = vec![0u32; d];
        for k in (0..d).rev() {
            v[k] = (i % pu) as u32;
            i /= pu;
        }
        v
    };
    let index = |v: &[u32]| v.iter().fold(0usize, |acc, &x| acc * pu + x as usize);
    let mut out = BTreeMap::new();
    for xi in 0..dim {
        let x = digits(xi);
        for zi in 0..dim {
            let z = digits(zi);
            let mut acc = C64::new(0.0, 0.0);
            for ai in 0..dim {
                let a = digits(ai);
                let shifted: Vec<u32> = a.iter().zip(&x).map(|(&u, &v)| (u + v) % p).collect();
                let za: u64 = z.iter().zip(&a).map(|(&u, &v)| u as u64 * v as u64).sum();
                acc += omega(p, za).conj() * m.get(index(&shifted), ai);
            }
            acc /= dim as f64;
            if acc.norm() > 1e-12 {
                out.insert(PauliLabel(x.iter().zip(&z).map(|(&c, &c2)| (c, c2)).collect()), acc);
            }
        }
    }
    out
}
