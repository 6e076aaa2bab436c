//! Prime-field arithmetic, polynomials and Lagrange coefficients.

use crate::error::{Error, Result};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Largest modulus accepted by [`PrimeField::new`].
pub const MAX_PRIME: u32 = 10_000;

/// The field F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if p > MAX_PRIME {
            return Err(Error::FieldTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn elem(&self, v: i64) -> Fp {
        Fp { value: v.rem_euclid(self.p as i64) as u32, p: self.p }
    }

    pub fn zero(&self) -> Fp {
        self.elem(0)
    }

    pub fn one(&self) -> Fp {
        self.elem(1)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fp> + '_ {
        (0..self.p).map(move |v| Fp { value: v, p: self.p })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        (self.p - a) % self.p
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Inverse on raw residues via extended Euclid.
    pub fn inv(&self, a: u32) -> Result<u32> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(t0.rem_euclid(self.p as i64) as u32)
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// An element of F_p, carrying its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    value: u32,
    p: u32,
}

impl Fp {
    #[inline]
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        assert_eq!(self.p, o.p, "field mismatch");
        Fp { value: (self.value + o.value) % self.p, p: self.p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        assert_eq!(self.p, o.p, "field mismatch");
        Fp { value: (self.value + self.p - o.value) % self.p, p: self.p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        assert_eq!(self.p, o.p, "field mismatch");
        Fp { value: ((self.value as u64 * o.value as u64) % self.p as u64) as u32, p: self.p }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp { value: (self.p - self.value) % self.p, p: self.p }
    }
}

pub fn field_inv(field: PrimeField, a: Fp) -> Result<Fp> {
    if a.p != field.p {
        return Err(Error::FieldMismatch);
    }
    Ok(Fp { value: field.inv(a.value)?, p: field.p })
}

/// Polynomial over F_p, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPoly {
    field: PrimeField,
    coeffs: Vec<Fp>,
}

impl FieldPoly {
    pub fn new(field: PrimeField, coeffs: Vec<Fp>) -> Result<Self> {
        if coeffs.iter().any(|c| c.p != field.p) {
            return Err(Error::FieldMismatch);
        }
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(Self { field, coeffs })
    }

    pub fn from_values(field: PrimeField, values: &[i64]) -> Self {
        Self::new(field, values.iter().map(|&v| field.elem(v)).collect()).expect("same field")
    }

    pub fn coeffs(&self) -> &[Fp] {
        &self.coeffs
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
}

pub fn poly_eval(poly: &FieldPoly, x: Fp) -> Result<Fp> {
    if x.p != poly.field.p {
        return Err(Error::FieldMismatch);
    }
    let f = poly.field;
    let v = poly.coeffs.iter().rev().fold(0u32, |acc, c| f.add(f.mul(acc, x.value), c.value));
    Ok(Fp { value: v, p: f.p })
}

/// Coefficients c_j with sum_j c_j f(alpha_j) = f(0) for deg f < |points|.
pub fn lagrange_coeffs(field: PrimeField, points: &[Fp]) -> Result<Vec<Fp>> {
    for (i, a) in points.iter().enumerate() {
        if a.p != field.p {
            return Err(Error::FieldMismatch);
        }
        if a.is_zero() {
            return Err(Error::ZeroPoint);
        }
        if points[..i].contains(a) {
            return Err(Error::DuplicatePoint(a.value));
        }
    }
    let raw: Vec<u32> = points.iter().map(|a| a.value).collect();
    Ok(lagrange_at_zero(field, &raw)?.into_iter().map(|v| Fp { value: v, p: field.p }).collect())
}

/// Raw-residue version of [`lagrange_coeffs`]; assumes distinct nonzero points.
pub(crate) fn lagrange_at_zero(field: PrimeField, points: &[u32]) -> Result<Vec<u32>> {
    points
        .iter()
        .enumerate()
        .map(|(j, &aj)| {
            let mut num = 1;
            let mut den = 1;
            for (l, &al) in points.iter().enumerate() {
                if l != j {
                    num = field.mul(num, field.neg(al));
                    den = field.mul(den, field.sub(aj, al));
                }
            }
            Ok(field.mul(num, field.inv(den)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites_and_large() {
        assert_eq!(PrimeField::new(9), Err(Error::NotPrime(9)));
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        assert!(PrimeField::new(10_007).is_err());
        assert!(PrimeField::new(9973).is_ok());
    }

    #[test]
    fn inverse_examples() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(field_inv(f7, f7.elem(3)).unwrap().value(), 5);
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(field_inv(f5, f5.elem(1)).unwrap().value(), 1);
        let f11 = PrimeField::new(11).unwrap();
        assert_eq!(field_inv(f11, f11.elem(10)).unwrap().value(), 10);
        assert_eq!(field_inv(f11, f11.zero()), Err(Error::ZeroInverse));
    }

    #[test]
    fn eval_examples() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(poly_eval(&FieldPoly::from_values(f5, &[2, 3]), f5.elem(4)).unwrap().value(), 4);
        assert_eq!(poly_eval(&FieldPoly::from_values(f5, &[]), f5.elem(3)).unwrap().value(), 0);
        let f11 = PrimeField::new(11).unwrap();
        assert_eq!(poly_eval(&FieldPoly::from_values(f11, &[0, 0, 1]), f11.elem(7)).unwrap().value(), 5);
        assert_eq!(
            poly_eval(&FieldPoly::from_values(f11, &[1]), f5.elem(1)),
            Err(Error::FieldMismatch)
        );
    }

    #[test]
    fn poly_trims_trailing_zeros() {
        let f5 = PrimeField::new(5).unwrap();
        let p = FieldPoly::from_values(f5, &[1, 0, 5]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(FieldPoly::from_values(f5, &[0]).degree(), None);
    }

    #[test]
    fn lagrange_single_point() {
        let f = PrimeField::new(13).unwrap();
        let c = lagrange_coeffs(f, &[f.elem(1)]).unwrap();
        assert_eq!(c, vec![f.one()]);
    }

    #[test]
    fn lagrange_errors() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(lagrange_coeffs(f, &[f.elem(1), f.elem(1)]), Err(Error::DuplicatePoint(1)));
        assert_eq!(lagrange_coeffs(f, &[f.elem(0)]), Err(Error::ZeroPoint));
    }
}
