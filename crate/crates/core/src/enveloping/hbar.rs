use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// Polynomial in the formal symbol ħ with complex coefficients, stored densely
/// by ascending power. Trailing exact zeros are trimmed, so the zero
/// polynomial is the empty vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HbarPoly(Vec<Complex64>);

impl HbarPoly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(c, 0)
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    /// `c ħ^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Self::from_coeffs(v)
    }

    pub fn from_coeffs(v: Vec<Complex64>) -> Self {
        let mut p = Self(v);
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    /// Coefficient of `ħ^k` (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.0.get(k).copied().unwrap_or_default()
    }

    /// Highest power present, `None` for zero.
    pub fn order(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_coeffs(self.0.iter().map(|x| x * c).collect())
    }

    /// Entrywise multiplication by a real factor, `(re*s, im*s)`.
    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_coeffs(self.0.iter().map(|x| x * s).collect())
    }

    pub fn div_real(&self, s: f64) -> Self {
        Self::from_coeffs(self.0.iter().map(|x| x / s).collect())
    }

    /// Drops every power above `k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::from_coeffs(self.0.iter().take(k + 1).copied().collect())
    }

    /// Zeroes coefficients with modulus at most `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Self::from_coeffs(
            self.0
                .iter()
                .map(|c| if c.norm() <= tol { Complex64::new(0.0, 0.0) } else { *c })
                .collect(),
        )
    }

    pub fn evaluate(&self, hbar: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * hbar + c)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add<&HbarPoly> for &HbarPoly {
    type Output = HbarPoly;

    fn add(self, rhs: &HbarPoly) -> HbarPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&HbarPoly> for HbarPoly {
    fn add_assign(&mut self, rhs: &HbarPoly) {
        if self.0.len() < rhs.0.len() {
            self.0.resize(rhs.0.len(), Complex64::new(0.0, 0.0));
        }
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
        self.trim();
    }
}

impl Sub<&HbarPoly> for &HbarPoly {
    type Output = HbarPoly;

    fn sub(self, rhs: &HbarPoly) -> HbarPoly {
        self + &(-rhs)
    }
}

impl Neg for &HbarPoly {
    type Output = HbarPoly;

    fn neg(self) -> HbarPoly {
        HbarPoly(self.0.iter().map(|c| -c).collect())
    }
}

impl Mul<&HbarPoly> for &HbarPoly {
    type Output = HbarPoly;

    fn mul(self, rhs: &HbarPoly) -> HbarPoly {
        if self.is_zero() || rhs.is_zero() {
            return HbarPoly::zero();
        }
        let mut v = vec![Complex64::new(0.0, 0.0); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        HbarPoly::from_coeffs(v)
    }
}

impl fmt::Display for HbarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({},{})", c.re + 0.0, c.im + 0.0)?;
            if k > 0 {
                write!(f, " * hbar^{k}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trimming_and_zero() {
        assert!(HbarPoly::from_coeffs(vec![c(0.0, 0.0); 3]).is_zero());
        let p = HbarPoly::monomial(c(2.0, 0.0), 2);
        assert_eq!(p.order(), Some(2));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn product_and_evaluation() {
        // (1 + iħ)(1 - iħ) = 1 + ħ²
        let a = HbarPoly::from_coeffs(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let b = HbarPoly::from_coeffs(vec![c(1.0, 0.0), c(0.0, -1.0)]);
        let p = &a * &b;
        assert_eq!(p.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(p.evaluate(c(2.0, 0.0)), c(5.0, 0.0));
        assert_eq!(p.truncate(1), HbarPoly::one());
    }
}
