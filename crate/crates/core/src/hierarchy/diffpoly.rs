//! Exact-rational differential polynomials in the jet variables `uᵢ = ∂ₓⁱq`
//! and the separate time-derivative symbols `qtᵢ = ∂ₓⁱ∂ₜq`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Product of jet powers. Exponent vectors carry no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    u: Vec<u32>,
    qt: Vec<u32>,
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

impl Monomial {
    pub fn new(u: &[u32], qt: &[u32]) -> Self {
        Self { u: trim(u.to_vec()), qt: trim(qt.to_vec()) }
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn u_exponents(&self) -> &[u32] {
        &self.u
    }

    pub fn qt_exponents(&self) -> &[u32] {
        &self.qt
    }

    pub fn degree(&self) -> u32 {
        self.u.iter().sum::<u32>() + self.qt.iter().sum::<u32>()
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        let zip = |a: &[u32], b: &[u32]| -> Vec<u32> {
            (0..a.len().max(b.len()))
                .map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0))
                .collect()
        };
        Monomial { u: zip(&self.u, &o.u), qt: zip(&self.qt, &o.qt) }
    }
}

/// Display order: higher total degree first, then lexicographically larger
/// exponent vectors (`u₀` first, then the time symbols) first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| other.u.cmp(&self.u))
            .then_with(|| other.qt.cmp(&self.qt))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &e) in self.u.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("u{i}")),
                _ => parts.push(format!("u{i}^{e}")),
            }
        }
        for (i, &e) in self.qt.iter().enumerate() {
            let name = if i == 0 { "qt".to_string() } else { format!("qt_x{i}") };
            match e {
                0 => {}
                1 => parts.push(name),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// Polynomial in jet variables with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The jet variable `uᵢ = ∂ₓⁱq`.
    pub fn u(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Self::monomial(Monomial::new(&e, &[]), BigRational::one())
    }

    /// The time symbol `∂ₓⁱ∂ₜq`.
    pub fn qt(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Self::monomial(Monomial::new(&[], &e), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in display order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Highest `i` with `uᵢ` present.
    pub fn jet_order(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.u.len().checked_sub(1)).max()
    }

    pub fn has_time_symbols(&self) -> bool {
        self.terms.keys().any(|m| !m.qt.is_empty())
    }

    /// Total x-derivative: `∂ₓuᵢ = uᵢ₊₁`, `∂ₓqtᵢ = qtᵢ₊₁`.
    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (i, &e) in m.u.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut u = m.u.clone();
                u[i] -= 1;
                if u.len() <= i + 1 {
                    u.push(0);
                }
                u[i + 1] += 1;
                out.add_term(Monomial { u: trim(u), qt: m.qt.clone() }, c * BigInt::from(e));
            }
            for (i, &e) in m.qt.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut qt = m.qt.clone();
                qt[i] -= 1;
                if qt.len() <= i + 1 {
                    qt.push(0);
                }
                qt[i + 1] += 1;
                out.add_term(Monomial { u: m.u.clone(), qt: trim(qt) }, c * BigInt::from(e));
            }
        }
        out
    }

    pub fn dx_n(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.dx())
    }

    /// Evaluates at jet values `jets[i] = uᵢ`.
    pub fn eval(&self, jets: &[f64]) -> Result<f64> {
        if self.has_time_symbols() {
            return Err(Error::InvalidParameter(
                "cannot evaluate a polynomial containing time symbols".into(),
            ));
        }
        if let Some(k) = self.jet_order() {
            if k >= jets.len() {
                return Err(Error::InvalidParameter(format!(
                    "polynomial needs jets up to u{k}, got {}",
                    jets.len()
                )));
            }
        }
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for (i, &e) in m.u.iter().enumerate() {
                v *= jets[i].powi(e as i32);
            }
            acc += v;
        }
        Ok(acc)
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, o: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, o: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, o: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for DiffPoly {
            type Output = DiffPoly;
            fn $f(self, o: DiffPoly) -> DiffPoly {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn fmt_coeff(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "−")?,
                (0, false) => {}
                (_, true) => write!(f, " − ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let is_const = m.degree() == 0;
            if is_const {
                write!(f, "{}", fmt_coeff(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}·{m}", fmt_coeff(&a))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_shifts_jets() {
        let p = &DiffPoly::u(0) * &DiffPoly::u(0);
        let d = p.dx();
        assert_eq!(d, (&DiffPoly::u(0) * &DiffPoly::u(1)).scale(&rat(2, 1)));
    }

    #[test]
    fn display_order_and_signs() {
        let p = &(&DiffPoly::u(0) * &DiffPoly::u(0)).scale(&rat(3, 8)) - &DiffPoly::u(2).scale(&rat(1, 8));
        assert_eq!(p.to_string(), "3/8·u0^2 − 1/8·u2");
        let q = &DiffPoly::u(1) - &DiffPoly::qt(0);
        assert_eq!(q.to_string(), "u1 − qt");
        assert_eq!(DiffPoly::zero().to_string(), "0");
        assert_eq!((-&DiffPoly::one()).to_string(), "−1");
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = &DiffPoly::u(3) - &DiffPoly::u(3);
        assert!(p.is_zero());
    }

    #[test]
    fn evaluation() {
        let p = &(&DiffPoly::u(0) * &DiffPoly::u(1)).scale(&rat(3, 2)) - &DiffPoly::u(3).scale(&rat(1, 4));
        let v = p.eval(&[2.0, 3.0, 0.0, 4.0]).unwrap();
        assert!((v - 8.0).abs() < 1e-15);
        assert!(p.eval(&[1.0, 2.0]).is_err());
        assert!(DiffPoly::qt(0).eval(&[1.0]).is_err());
    }

    #[test]
    fn jet_order() {
        assert_eq!(DiffPoly::one().jet_order(), None);
        assert_eq!(DiffPoly::u(4).jet_order(), Some(4));
    }
}
