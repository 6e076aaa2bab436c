//! Standard gate matrices.

use super::{CMatrix, C64};
use std::f64::consts::PI;

/// w^k with w = exp(2 pi i / p).
pub fn omega(p: u32, k: u64) -> C64 {
    let (p, k) = (p as u64, k % p as u64);
    // Quarter turns are exact so real and imaginary phases carry no rounding residue.
    if (4 * k) % p == 0 {
        return [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][(4 * k / p) as usize];
    }
    C64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)
}

/// B^c : |a> -> |a + c>.
pub fn shift(p: u32, c: u32) -> CMatrix {
    let n = p as usize;
    CMatrix::from_fn(n, |i, j| if i == (j + c as usize) % n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// P^c : |a> -> w^{ca} |a>.
pub fn clock(p: u32, c: u32) -> CMatrix {
    CMatrix::from_fn(p as usize, |i, j| if i == j { omega(p, c as u64 * i as u64) } else { C64::new(0.0, 0.0) })
}

/// W_r : |a> -> p^{-1/2} sum_b w^{rab} |b>; r = 1 is the plain Fourier gate.
pub fn fourier(p: u32, r: u32) -> CMatrix {
    let s = 1.0 / (p as f64).sqrt();
    CMatrix::from_fn(p as usize, |b, a| omega(p, r as u64 * a as u64 * b as u64) * s)
}

pub fn hadamard() -> CMatrix {
    fourier(2, 1)
}

/// |a> -> i^a |a>.
pub fn phase_i() -> CMatrix {
    CMatrix::from_rows(&[vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]])
}

pub fn sigma_x() -> CMatrix {
    shift(2, 1)
}

pub fn sigma_z() -> CMatrix {
    clock(2, 1)
}

/// Real convention sigma_y = sigma_z sigma_x = [[0, 1], [-1, 0]].
pub fn sigma_y() -> CMatrix {
    sigma_z().mul(&sigma_x())
}

/// Unitary of a classical reversible map on t digits, with an optional phase per input.
pub fn perm_matrix(p: u32, t: usize, f: impl Fn(&[u32]) -> (Vec<u32>, C64)) -> CMatrix {
    let n = (p as usize).pow(t as u32);
    let mut m = CMatrix::zeros(n);
    for col in 0..n {
        let digits = index_digits(col, p, t);
        let (img, ph) = f(&digits);
        let row = img.iter().fold(0usize, |acc, &d| acc * p as usize + d as usize);
        m.set(row, col, ph);
    }
    m
}

pub(crate) fn index_digits(mut idx: usize, p: u32, t: usize) -> Vec<u32> {
    let mut d = vec![0u32; t];
    for i in (0..t).rev() {
        d[i] = (idx % p as usize) as u32;
        idx /= p as usize;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_y_is_real() {
        let y = sigma_y();
        assert_eq!(y.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(y.get(1, 0), C64::new(-1.0, 0.0));
    }

    #[test]
    fn fourier_unitary() {
        for p in [2, 3, 5, 11] {
            for r in 1..p {
                assert!(fourier(p, r).is_unitary(1e-12));
            }
        }
    }
}
