use super::{check_targets, pow_usize, CMatrix, DenseState, SparseState, SparseVec, C64, REDUCED_CAP, TOL};
use crate::error::{Error, Result};
use rustc_hash::FxHashMap;

/// Density matrix over n qupits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    p: u32,
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(p: u32, n: usize, m: CMatrix) -> Result<Self> {
        if pow_usize(p, n) != Some(m.dim()) {
            return Err(Error::DimMismatch);
        }
        let rho = Self { p, n, m };
        if !rho.is_valid() {
            return Err(Error::BadParams("not a density matrix".into()));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(p: u32, n: usize, m: CMatrix) -> Self {
        Self { p, n, m }
    }

    pub fn pure(state: &DenseState) -> Self {
        let a = state.amplitudes();
        let m = CMatrix::from_fn(a.len(), |i, j| a[i] * a[j].conj());
        Self { p: state.p(), n: state.n(), m }
    }

    pub fn maximally_mixed(p: u32, n: usize) -> Self {
        let d = (p as usize).pow(n as u32);
        Self { p, n, m: CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)) }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.m.mul(&self.m).trace().re
    }

    pub fn is_valid(&self) -> bool {
        self.m.is_hermitian(TOL)
            && (self.m.trace() - C64::new(1.0, 0.0)).norm() < TOL
            && hermitian_eigenvalues(&self.m).iter().all(|&l| l >= -1e-9)
    }

    pub fn from_dense(state: &DenseState, keep: &[usize]) -> Result<Self> {
        check_targets(state.n(), keep)?;
        pow_usize(state.p(), keep.len())
            .filter(|&d| d <= REDUCED_CAP)
            .ok_or_else(|| Error::TooLarge("reduced dimension".into()))?;
        state.to_sparse().partial_trace(keep)
    }
}

/// Sum of absolute eigenvalues of rho1 - rho2.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.p != b.p || a.n != b.n {
        return Err(Error::DimMismatch);
    }
    Ok(hermitian_eigenvalues(&a.m.sub(&b.m)).iter().map(|l| l.abs()).sum())
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigh(a).0
}

/// Cyclic complex Jacobi: returns eigenvalues and column eigenvectors V with A = V diag V^dag.
pub fn hermitian_eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale: f64 = a.data().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m.get(i, j).norm_sqr()).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let e = apq / mag;
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s e*, c e*]].
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -e.conj() * s;
                let uqq = e.conj() * c;
                // M <- M U (columns p, q).
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, mkp * upp + mkq * uqp);
                    m.set(k, q, mkp * upq + mkq * uqq);
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * upp + vkq * uqp);
                    v.set(k, q, vkp * upq + vkq * uqq);
                }
                // M <- U^dag M (rows p, q).
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, upp.conj() * mpk + uqp.conj() * mqk);
                    m.set(q, k, upq.conj() * mpk + uqq.conj() * mqk);
                }
                m.set(p, q, C64::new(0.0, 0.0));
                m.set(q, p, C64::new(0.0, 0.0));
            }
        }
    }
    ((0..n).map(|i| m.get(i, i).re).collect(), v)
}

/// Trace norm of sum_i w_i v_i v_i^dag - sum_j w'_j u_j u_j^dag for sparse vectors.
///
/// The vectors are orthonormalised (two-pass Gram-Schmidt) and the operator is diagonalised in
/// that basis, so the reduced space never has to be materialised densely.
pub fn mixture_trace_distance(plus: &[(f64, &SparseVec)], minus: &[(f64, &SparseVec)]) -> f64 {
    let all: Vec<(f64, &SparseVec)> =
        plus.iter().map(|&(w, v)| (w, v)).chain(minus.iter().map(|&(w, v)| (-w, v))).filter(|(w, v)| *w != 0.0 && !v.is_empty()).collect();
    let mut index: FxHashMap<&[u8], u32> = FxHashMap::default();
    for (_, v) in &all {
        for k in v.keys() {
            let next = index.len() as u32;
            index.entry(k.as_slice()).or_insert(next);
        }
    }
    let dim = index.len();
    let indexed: Vec<(f64, Vec<(u32, C64)>)> =
        all.iter().map(|(w, v)| (*w, v.iter().map(|(k, a)| (index[k.as_slice()], *a)).collect())).collect();
    let v = indexed.len();
    if dim <= 1024 && 10 * dim * dim <= v * v.min(dim) {
        let mut m = CMatrix::zeros(dim);
        for (w, vec) in &indexed {
            for &(i, a) in vec {
                for &(j, b) in vec {
                    m.add_to(i as usize, j as usize, a * b.conj() * *w);
                }
            }
        }
        hermitian_eigenvalues(&m).iter().map(|l| l.abs()).sum()
    } else if dim <= DENSE_BASIS_CAP {
        dense_basis_distance(dim, &indexed)
    } else {
        sparse_basis_distance(&indexed)
    }
}

/// Key-space size up to which Gram-Schmidt basis vectors are stored densely.
const DENSE_BASIS_CAP: usize = 1 << 16;

fn eigen_abs_sum(coords: &[(f64, Vec<C64>)], d: usize) -> f64 {
    let mut m = CMatrix::zeros(d);
    for (w, c) in coords {
        for i in 0..c.len() {
            if c[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..c.len() {
                m.add_to(i, j, c[i] * c[j].conj() * *w);
            }
        }
    }
    hermitian_eigenvalues(&m).iter().map(|l| l.abs()).sum()
}

fn dense_basis_distance(dim: usize, vecs: &[(f64, Vec<(u32, C64)>)]) -> f64 {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut coords: Vec<(f64, Vec<C64>)> = Vec::with_capacity(vecs.len());
    let mut resid = vec![C64::new(0.0, 0.0); dim];
    for (w, v) in vecs {
        let vnorm = v.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        // First pass only touches the support of v.
        let mut c: Vec<C64> = basis.iter().map(|q| v.iter().map(|&(i, a)| q[i as usize].conj() * a).sum()).collect();
        resid.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for &(i, a) in v {
            resid[i as usize] = a;
        }
        for (q, &cj) in basis.iter().zip(&c) {
            if cj.norm_sqr() > 0.0 {
                resid.iter_mut().zip(q).for_each(|(x, y)| *x -= cj * y);
            }
        }
        for (j, q) in basis.iter().enumerate() {
            let proj: C64 = q.iter().zip(&resid).map(|(a, b)| a.conj() * b).sum();
            if proj.norm_sqr() > 0.0 {
                c[j] += proj;
                resid.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let rn = resid.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if rn > 1e-10 * vnorm {
            basis.push(resid.iter().map(|a| a / rn).collect());
            c.push(C64::new(rn, 0.0));
        }
        coords.push((*w, c));
    }
    eigen_abs_sum(&coords, basis.len())
}

fn sparse_basis_distance(vecs: &[(f64, Vec<(u32, C64)>)]) -> f64 {
    let mut basis: Vec<FxHashMap<u32, C64>> = Vec::new();
    let mut coords: Vec<(f64, Vec<C64>)> = Vec::with_capacity(vecs.len());
    for (w, v) in vecs {
        let vnorm = v.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        let mut resid: FxHashMap<u32, C64> = v.iter().copied().collect();
        let mut c = vec![C64::new(0.0, 0.0); basis.len()];
        for _pass in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let proj: C64 = resid.iter().filter_map(|(k, b)| q.get(k).map(|a| a.conj() * b)).sum();
                if proj.norm() > 0.0 {
                    c[j] += proj;
                    for (k, a) in q {
                        *resid.entry(*k).or_default() -= proj * a;
                    }
                }
            }
        }
        let rn = resid.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if rn > 1e-10 * vnorm {
            resid.retain(|_, a| a.norm() > 1e-18);
            resid.values_mut().for_each(|a| *a /= rn);
            basis.push(resid);
            c.push(C64::new(rn, 0.0));
        }
        coords.push((*w, c));
    }
    eigen_abs_sum(&coords, basis.len())
}

/// Reduced-state trace distance between two pure sparse states on the `keep` qupits.
pub fn reduced_trace_distance(a: &SparseState, keep_a: &[usize], b: &SparseState, keep_b: &[usize]) -> f64 {
    let va = a.reduced_vectors(keep_a);
    let vb = b.reduced_vectors(keep_b);
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    let plus: Vec<(f64, &SparseVec)> = va.iter().map(|v| (1.0 / na, v)).collect();
    let minus: Vec<(f64, &SparseVec)> = vb.iter().map(|v| (1.0 / nb, v)).collect();
    mixture_trace_distance(&plus, &minus)
}
