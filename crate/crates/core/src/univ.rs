//! Eigenvalue check for the commutators X_i = H Q_i H^-1 Q_i^-1 and Y_i = H Q_i^-1 H^-1 Q_i.

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::state::gates::{fourier, omega};
use crate::state::{CMatrix, C64};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct UnivReport {
    pub p: u32,
    pub i: u32,
    pub n_max: u32,
    pub identity_off_subspace: bool,
    pub det_one: bool,
    pub trace_matches: bool,
    pub not_root_of_unity: bool,
    pub non_commuting: bool,
    pub trace_x: f64,
    pub trace_y: f64,
    pub expected_trace: f64,
    pub theta: f64,
    pub commutator_offdiag: f64,
}

impl UnivReport {
    pub fn all_pass(&self) -> bool {
        self.identity_off_subspace && self.det_one && self.trace_matches && self.not_root_of_unity && self.non_commuting
    }
}

const EPS: f64 = 1e-10;

/// Diagonal Q_i: multiplies |i> by w.
pub fn q_matrix(p: u32, i: u32, inverse: bool) -> CMatrix {
    let w = if inverse { omega(p, 1).conj() } else { omega(p, 1) };
    CMatrix::from_fn(p as usize, |a, b| if a != b { C64::new(0.0, 0.0) } else if a as u32 == i { w } else { C64::new(1.0, 0.0) })
}

/// Restriction of `x` to span{|i>, |alpha_i>}, |alpha_i> = (p-1)^{-1/2} sum_{b != i} w^{ib}|b>.
fn restrict(p: u32, i: u32, x: &CMatrix) -> ([[C64; 2]; 2], CMatrix) {
    let n = p as usize;
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[i as usize] = C64::new(1.0, 0.0);
    let s = 1.0 / ((p - 1) as f64).sqrt();
    let alpha: Vec<C64> =
        (0..p).map(|b| if b == i { C64::new(0.0, 0.0) } else { omega(p, (i * b) as u64) * s }).collect();
    let basis = [e, alpha];
    let xb: Vec<Vec<C64>> = basis.iter().map(|v| x.apply(v)).collect();
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for (a, u) in basis.iter().enumerate() {
        for (b, xv) in xb.iter().enumerate() {
            r[a][b] = u.iter().zip(xv).map(|(p, q)| p.conj() * q).sum();
        }
    }
    let proj = CMatrix::from_fn(n, |a, b| basis.iter().map(|v| v[a] * v[b].conj()).sum());
    (r, proj)
}

fn det2(m: &[[C64; 2]; 2]) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn mul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Phase theta of an eigenvalue e^{i theta} of a 2x2 special unitary with real trace.
fn eigen_phase(tr: f64) -> f64 {
    (tr / 2.0).clamp(-1.0, 1.0).acos()
}

/// Whether theta is within `tol` of 2 pi k / n for some n <= n_max, k < n.
pub fn near_root_of_unity(theta: f64, n_max: u32, tol: f64) -> bool {
    let t = theta.rem_euclid(2.0 * PI);
    (1..=n_max).any(|n| {
        let step = 2.0 * PI / n as f64;
        let k = (t / step).round();
        (t - k * step).abs() <= tol
    })
}

pub fn univ_commutator_check(p: u32, i: u32, n_max: u32) -> Result<UnivReport> {
    PrimeField::new(p)?;
    if p <= 3 || i >= p {
        return Err(Error::BadParams(format!("need p > 3 and 0 <= i < p, got p={p}, i={i}")));
    }
    let h = fourier(p, 1);
    let hi = h.adjoint();
    let q = q_matrix(p, i, false);
    let qi = q_matrix(p, i, true);
    let x = h.mul(&q).mul(&hi).mul(&qi);
    let y = h.mul(&qi).mul(&hi).mul(&q);
    let (xr, proj) = restrict(p, i, &x);
    let (yr, _) = restrict(p, i, &y);
    let id = CMatrix::identity(p as usize);
    let perp = id.sub(&proj);
    let identity_off_subspace =
        x.sub(&id).mul(&perp).max_diff(&CMatrix::zeros(p as usize)) < EPS && y.sub(&id).mul(&perp).max_diff(&CMatrix::zeros(p as usize)) < EPS;
    let det_one = (det2(&xr) - 1.0).norm() < EPS && (det2(&yr) - 1.0).norm() < EPS;
    let expected_trace = (2.0 + (p - 1) as f64 * 2.0 * (2.0 * PI / p as f64).cos()) / p as f64;
    let tx = xr[0][0] + xr[1][1];
    let ty = yr[0][0] + yr[1][1];
    let trace_matches = (tx - expected_trace).norm() < EPS && (ty - expected_trace).norm() < EPS;
    let theta = eigen_phase(tx.re);
    let not_root_of_unity = !near_root_of_unity(theta, n_max, 1e-9);
    let xy = mul2(&xr, &yr);
    let yx = mul2(&yr, &xr);
    let comm_off = (xy[0][1] - yx[0][1]).norm().max((xy[1][0] - yx[1][0]).norm());
    let comm_max = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| (xy[a][b] - yx[a][b]).norm()).fold(0.0, f64::max);
    Ok(UnivReport {
        p,
        i,
        n_max,
        identity_off_subspace,
        det_one,
        trace_matches,
        not_root_of_unity,
        non_commuting: comm_max > EPS,
        trace_x: tx.re,
        trace_y: ty.re,
        expected_trace,
        theta,
        commutator_offdiag: comm_off,
    })
}
