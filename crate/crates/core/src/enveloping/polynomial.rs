use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::hbar::HbarPoly;
use crate::error::{Error, Result};

/// Multiset of variable (or generator) indices kept in non-decreasing order.
///
/// Serves both as a commutative monomial `x^{a_1}⋯x^{a_k}` and as a PBW word
/// `X_{a_1}⋯X_{a_k}`. Ordered by degree first, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        Self(idx)
    }

    pub fn var(i: usize) -> Self {
        Self(vec![i])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                v.push(self.0[i]);
                i += 1;
            } else {
                v.push(other.0[j]);
                j += 1;
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&other.0[j..]);
        Monomial(v)
    }

    /// `(variable, exponent)` pairs in increasing variable order.
    pub fn exponents(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &i in &self.0 {
            match out.last_mut() {
                Some((v, e)) if *v == i => *e += 1,
                _ => out.push((i, 1)),
            }
        }
        out
    }

    /// `∂_j` of the monomial as `(multiplicity, reduced monomial)`.
    pub fn derivative(&self, j: usize) -> Option<(usize, Monomial)> {
        let first = self.0.iter().position(|&i| i == j)?;
        let mult = self.0.iter().filter(|&&i| i == j).count();
        let mut v = self.0.clone();
        v.remove(first);
        Some((mult, Monomial(v)))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial on `g*` in the coordinates `x^1…x^dim`, with coefficients that
/// are polynomials in ħ. Exact-zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, HbarPoly>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: HbarPoly) -> Self {
        Self::term(nvars, Monomial::unit(), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, HbarPoly::one())
    }

    /// The coordinate function `x^i` (0-based index).
    pub fn variable(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        Self::term(nvars, Monomial::var(i), HbarPoly::one())
    }

    pub fn term(nvars: usize, m: Monomial, c: HbarPoly) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(m, &c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, HbarPoly> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> HbarPoly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in `x`, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Highest ħ power present.
    pub fn hbar_order(&self) -> Option<usize> {
        self.terms.values().filter_map(HbarPoly::order).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: &HbarPoly) {
        if c.is_zero() {
            return;
        }
        debug_assert!(m.indices().iter().all(|&i| i < self.nvars));
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_assign_poly(&mut self, other: &Polynomial) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    fn map_coeffs(&self, f: impl Fn(&HbarPoly) -> HbarPoly) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coeffs(|p| p.scale(c))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map_coeffs(|p| p.scale_real(s))
    }

    pub fn scale_hbar(&self, h: &HbarPoly) -> Self {
        self.map_coeffs(|p| p * h)
    }

    pub fn truncate_hbar(&self, k: usize) -> Self {
        self.map_coeffs(|p| p.truncate(k))
    }

    /// The ħ-free polynomial multiplying `ħ^k`.
    pub fn hbar_channel(&self, k: usize) -> Self {
        self.map_coeffs(|p| HbarPoly::constant(p.coeff(k)))
    }

    pub fn chop(&self, tol: f64) -> Self {
        self.map_coeffs(|p| p.chop(tol))
    }

    /// Part of homogeneous degree `d` in `x`.
    pub fn homogeneous_part(&self, d: usize) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if let Some((mult, reduced)) = m.derivative(j) {
                out.add_term(reduced, &c.scale_real(mult as f64));
            }
        }
        out
    }

    /// Value at the point `x`, still a polynomial in ħ.
    pub fn evaluate(&self, x: &[Complex64]) -> HbarPoly {
        assert_eq!(x.len(), self.nvars, "point has the wrong dimension");
        let mut acc = HbarPoly::zero();
        for (m, c) in &self.terms {
            let v: Complex64 = m.indices().iter().map(|&i| x[i]).product();
            acc += &c.scale(v);
        }
        acc
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        (self - other)
            .terms
            .values()
            .map(HbarPoly::max_abs)
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(HbarPoly::max_abs).fold(0.0, f64::max)
    }

    /// Canonical text form: `(re,im) * hbar^k * x1^e1 * … ` terms joined by
    /// ` + `, sorted by monomial (degree, then lexicographic) and ħ power.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses the text form produced by [`Polynomial::to_text`]. Also accepts
    /// plain real coefficients, bare `hbar`, bare `xI` and repeated factors.
    pub fn parse(s: &str, nvars: usize) -> Result<Self> {
        let s = s.trim();
        let mut out = Self::zero(nvars);
        if s == "0" {
            return Ok(out);
        }
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        for term in s.split(" + ") {
            let mut coeff = Complex64::new(1.0, 0.0);
            let mut hpow = 0usize;
            let mut idx = Vec::new();
            for factor in term.split('*').map(str::trim) {
                parse_factor(factor, nvars, &mut coeff, &mut hpow, &mut idx)?;
            }
            out.add_term(Monomial::new(idx), &HbarPoly::monomial(coeff, hpow));
        }
        Ok(out)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("invalid number '{s}'")))
}

fn parse_factor(
    factor: &str,
    nvars: usize,
    coeff: &mut Complex64,
    hpow: &mut usize,
    idx: &mut Vec<usize>,
) -> Result<()> {
    let power = |rest: &str| -> Result<usize> {
        match rest.strip_prefix('^') {
            Some(e) => e
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid exponent in '{factor}'"))),
            None if rest.is_empty() => Ok(1),
            None => Err(Error::Parse(format!("unrecognised factor '{factor}'"))),
        }
    };
    if let Some(inner) = factor.strip_prefix('(').and_then(|f| f.strip_suffix(')')) {
        let (re, im) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("complex coefficient '{factor}' needs (re,im)")))?;
        *coeff *= Complex64::new(parse_f64(re)?, parse_f64(im)?);
    } else if let Some(rest) = factor.strip_prefix("hbar") {
        *hpow += power(rest)?;
    } else if let Some(rest) = factor.strip_prefix('x') {
        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        let var: usize = rest[..digits]
            .parse()
            .map_err(|_| Error::Parse(format!("invalid variable in '{factor}'")))?;
        if var == 0 || var > nvars {
            return Err(Error::Parse(format!(
                "variable x{var} out of range 1..={nvars}"
            )));
        }
        let e = power(&rest[digits..])?;
        idx.extend(std::iter::repeat_n(var - 1, e));
    } else {
        *coeff *= parse_f64(factor)?;
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            for (k, z) in c.coeffs().iter().enumerate() {
                if *z == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({},{})", z.re + 0.0, z.im + 0.0)?;
                if k > 0 {
                    write!(f, " * hbar^{k}")?;
                }
                for (v, e) in m.exponents() {
                    write!(f, " * x{}^{e}", v + 1)?;
                }
            }
        }
        Ok(())
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_assign_poly(rhs);
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.map_coeffs(|c| -c)
    }
}

/// Pointwise (commutative) product.
impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.product(mb), &(ca * cb));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn monomial_order_is_graded() {
        let a = Monomial::new(vec![2]);
        let b = Monomial::new(vec![0, 0]);
        assert!(a < b);
        assert_eq!(Monomial::new(vec![2, 0, 1]).indices(), &[0, 1, 2]);
        assert_eq!(b.exponents(), vec![(0, 2)]);
        assert_eq!(b.derivative(0), Some((2, Monomial::var(0))));
        assert_eq!(b.derivative(1), None);
    }

    #[test]
    fn arithmetic() {
        let x = Polynomial::variable(3, 0);
        let y = Polynomial::variable(3, 1);
        let p = &(&x + &y) * &(&x - &y);
        let expect = &(&x * &x) - &(&y * &y);
        assert_eq!(p, expect);
        assert!((&p - &p).is_zero());
        assert_eq!(p.degree(), Some(2));
        assert_eq!((&x * &x).derivative(0), x.scale_real(2.0));
    }

    #[test]
    fn text_round_trip() {
        let mut p = Polynomial::zero(3);
        p.add_term(Monomial::new(vec![0, 1]), &HbarPoly::constant(c(1.0, 0.0)));
        p.add_term(Monomial::new(vec![2]), &HbarPoly::monomial(c(0.0, 0.5), 1));
        p.add_term(Monomial::unit(), &HbarPoly::constant(c(-0.1, 1e-300)));
        let s = p.to_text();
        assert_eq!(
            s.split(" + ").next().unwrap().split(" * ").count(),
            1,
            "constant term first: {s}"
        );
        assert!(s.contains("(0,0.5) * hbar^1 * x3^1"), "{s}");
        assert_eq!(Polynomial::parse(&s, 3).unwrap(), p);
        assert_eq!(Polynomial::parse("0", 3).unwrap(), Polynomial::zero(3));
        assert_eq!(Polynomial::parse("x1 * x2", 3).unwrap(), &Polynomial::variable(3, 0) * &Polynomial::variable(3, 1));
        assert_eq!(
            Polynomial::parse("2 * hbar * x1^2", 3).unwrap().to_text(),
            "(2,0) * hbar^1 * x1^2"
        );
    }

    #[test]
    fn parse_errors() {
        assert!(Polynomial::parse("x4", 3).is_err());
        assert!(Polynomial::parse("x0", 3).is_err());
        assert!(Polynomial::parse("(1,2", 3).is_err());
        assert!(Polynomial::parse("y1", 3).is_err());
        assert!(Polynomial::parse("", 3).is_err());
    }

    #[test]
    fn evaluation() {
        let p = Polynomial::parse("(1,0) * x1^2 + (0,1) * hbar^1 * x2^1", 2).unwrap();
        let v = p.evaluate(&[c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(v.coeffs(), &[c(4.0, 0.0), c(0.0, 3.0)]);
    }
}
