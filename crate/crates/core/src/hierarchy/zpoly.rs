//! Polynomials in the spectral variable `z` with differential-polynomial coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::DiffPoly;

/// `Σ coeffs[k]·z^k`, with no trailing zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZPoly {
    coeffs: Vec<DiffPoly>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<DiffPoly>) -> Self {
        while coeffs.last().is_some_and(DiffPoly::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(p: DiffPoly) -> Self {
        Self::new(vec![p])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::new(vec![DiffPoly::zero(), DiffPoly::one()])
    }

    pub fn coeffs(&self) -> &[DiffPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> DiffPoly {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn dx(&self) -> Self {
        Self::new(self.coeffs.iter().map(DiffPoly::dx).collect())
    }
}

impl Add for &ZPoly {
    type Output = ZPoly;
    fn add(self, o: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ZPoly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl Sub for &ZPoly {
    type Output = ZPoly;
    fn sub(self, o: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ZPoly::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl Mul for &ZPoly {
    type Output = ZPoly;
    fn mul(self, o: &ZPoly) -> ZPoly {
        if self.is_zero() || o.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![DiffPoly::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ZPoly::new(out)
    }
}

impl Neg for &ZPoly {
    type Output = ZPoly;
    fn neg(self) -> ZPoly {
        ZPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})·z")?,
                _ => write!(f, "({c})·z^{k}")?,
            }
        }
        Ok(())
    }
}

/// 2×2 matrix of [`ZPoly`] entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZPolyMatrix {
    pub entries: [[ZPoly; 2]; 2],
}

impl ZPolyMatrix {
    pub fn new(a11: ZPoly, a12: ZPoly, a21: ZPoly, a22: ZPoly) -> Self {
        Self { entries: [[a11, a12], [a21, a22]] }
    }

    /// Entry at 1-based position `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> &ZPoly {
        &self.entries[i - 1][j - 1]
    }

    pub fn map(&self, f: impl Fn(&ZPoly) -> ZPoly) -> Self {
        let e = &self.entries;
        Self::new(f(&e[0][0]), f(&e[0][1]), f(&e[1][0]), f(&e[1][1]))
    }

    pub fn dx(&self) -> Self {
        self.map(ZPoly::dx)
    }

    pub fn trace(&self) -> ZPoly {
        &self.entries[0][0] + &self.entries[1][1]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.entries;
        let b = &o.entries;
        let cell = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        Self::new(cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        let a = &self.entries;
        let b = &o.entries;
        Self::new(&a[0][0] - &b[0][0], &a[0][1] - &b[0][1], &a[1][0] - &b[1][0], &a[1][1] - &b[1][1])
    }

    pub fn add(&self, o: &Self) -> Self {
        let a = &self.entries;
        let b = &o.entries;
        Self::new(&a[0][0] + &b[0][0], &a[0][1] + &b[0][1], &a[1][0] + &b[1][0], &a[1][1] + &b[1][1])
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().flatten().filter_map(ZPoly::degree).max()
    }
}

impl fmt::Display for ZPolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=2 {
            for j in 1..=2 {
                writeln!(f, "({i},{j}): {}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}
