//! Dense matrices over F_p, row-major with explicit shape.

use crate::field::PrimeField;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    /// Builds from row vectors; all rows must share one length (`cols` is used when empty).
    pub fn from_rows(rows: &[Vec<u32>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul_vec(&self, f: PrimeField, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|r| dot(f, self.row(r), v)).collect()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, f: PrimeField) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m.get(i, c) != 0) else { continue };
            m.swap_rows(r, piv);
            let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
            for j in 0..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                let factor = m.get(i, c);
                if i != r && factor != 0 {
                    for j in 0..m.cols {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.rows = r;
        m.data.truncate(r * m.cols);
        (m, pivots)
    }

    pub fn rank(&self, f: PrimeField) -> usize {
        self.rref(f).1.len()
    }

    /// Basis (as rows) of { x : self * x = 0 }.
    pub fn nullspace(&self, f: PrimeField) -> FpMatrix {
        let (r, pivots) = self.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![0u32; self.cols];
            v[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(i, fc));
            }
            out.push(v);
        }
        FpMatrix::from_rows(&out, self.cols)
    }

    /// Solves x * self = b for a row vector x, if consistent.
    pub fn solve_left(&self, f: PrimeField, b: &[u32]) -> Option<Vec<u32>> {
        // x * A = b  <=>  A^T x^T = b^T; augment and eliminate.
        let t = self.transpose();
        let mut aug = FpMatrix::zeros(t.rows, t.cols + 1);
        for (i, &bi) in b.iter().enumerate().take(t.rows) {
            for j in 0..t.cols {
                aug.set(i, j, t.get(i, j));
            }
            aug.set(i, t.cols, bi);
        }
        let (r, pivots) = aug.rref(f);
        if pivots.contains(&t.cols) {
            return None;
        }
        let mut x = vec![0u32; t.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, t.cols);
        }
        Some(x)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Every linear combination u * self, in lexicographic order of u.
    pub fn span(&self, f: PrimeField) -> Vec<Vec<u32>> {
        let p = f.p() as usize;
        let total = p.pow(self.rows as u32);
        let mut out = Vec::with_capacity(total);
        let mut coeffs = vec![0u32; self.rows];
        for idx in 0..total {
            let mut rem = idx;
            for i in (0..self.rows).rev() {
                coeffs[i] = (rem % p) as u32;
                rem /= p;
            }
            let mut w = vec![0u32; self.cols];
            for (i, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    for (j, wj) in w.iter_mut().enumerate() {
                        *wj = f.add(*wj, f.mul(c, self.get(i, j)));
                    }
                }
            }
            out.push(w);
        }
        out
    }
}

pub fn dot(f: PrimeField, a: &[u32], b: &[u32]) -> u32 {
    let acc: u64 = a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum();
    (acc % f.p() as u64) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_nullspace() {
        let f = PrimeField::new(5).unwrap();
        let m = FpMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 2]], 3);
        assert_eq!(m.rank(f), 2);
        let ns = m.nullspace(f);
        assert_eq!(ns.rows(), 1);
        assert_eq!(m.mul_vec(f, ns.row(0)), vec![0, 0]);
    }

    #[test]
    fn solve_left_roundtrip() {
        let f = PrimeField::new(7).unwrap();
        let m = FpMatrix::from_rows(&[vec![1, 0, 3], vec![0, 1, 5]], 3);
        let b = vec![3, 4, (3 * 3 + 4 * 5) % 7];
        assert_eq!(m.solve_left(f, &b), Some(vec![3, 4]));
        assert_eq!(m.solve_left(f, &[1, 0, 0]), None);
    }

    #[test]
    fn span_size() {
        let f = PrimeField::new(3).unwrap();
        let m = FpMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]], 3);
        let s = m.span(f);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], vec![0, 0, 0]);
    }
}
