use num_complex::Complex64;

use super::hbar::HbarPoly;
use super::polynomial::{Monomial, Polynomial};
use super::star::{gutt_star, star_truncated};
use super::uea::{Deformation, Enveloping, UeaElement};
use crate::error::{Error, Result};
use crate::lie_core::LieAlgebraData;
use crate::linalg::CMatrix;

/// How the entries of two polynomial matrices are multiplied.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ProductMode {
    Pointwise,
    Star,
}

/// Square matrix whose entries are polynomials on g*.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    d: usize,
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zeros(d: usize, nvars: usize) -> Self {
        Self {
            d,
            nvars,
            entries: vec![Polynomial::zero(nvars); d * d],
        }
    }

    pub fn identity(d: usize, nvars: usize) -> Self {
        let mut m = Self::zeros(d, nvars);
        for i in 0..d {
            m.entries[i * d + i] = Polynomial::one(nvars);
        }
        m
    }

    /// Constant (degree-0, ħ-free) entries.
    pub fn from_matrix(m: &CMatrix, nvars: usize) -> Self {
        assert!(m.is_square(), "polynomial matrices are square");
        let d = m.nrows();
        let mut out = Self::zeros(d, nvars);
        for i in 0..d {
            for j in 0..d {
                out.entries[i * d + j] = Polynomial::constant(nvars, HbarPoly::constant(m[(i, j)]));
            }
        }
        out
    }

    /// `monomial · coeff · M` entrywise.
    pub fn from_term(m: &CMatrix, nvars: usize, monomial: &Monomial, coeff: &HbarPoly) -> Self {
        let d = m.nrows();
        let mut out = Self::zeros(d, nvars);
        for i in 0..d {
            for j in 0..d {
                out.entries[i * d + j] =
                    Polynomial::term(nvars, monomial.clone(), coeff.scale(m[(i, j)]));
            }
        }
        out
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.d + j] = p;
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Polynomial::degree).max()
    }

    pub fn hbar_order(&self) -> Option<usize> {
        self.entries.iter().filter_map(Polynomial::hbar_order).max()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    fn check_shape(&self, other: &PolyMatrix) -> Result<()> {
        if self.d != other.d || self.nvars != other.nvars {
            return Err(Error::domain(format!(
                "shape mismatch: {}×{} over {} variables vs {}×{} over {}",
                self.d, self.d, self.nvars, other.d, other.d, other.nvars
            )));
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        Self {
            d: self.d,
            nvars: self.nvars,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self {
            d: self.d,
            nvars: self.nvars,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &PolyMatrix) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|p| p.scale_real(s))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn scale_hbar(&self, h: &HbarPoly) -> Self {
        self.map(|p| p.scale_hbar(h))
    }

    pub fn truncate_hbar(&self, k: usize) -> Self {
        self.map(|p| p.truncate_hbar(k))
    }

    pub fn hbar_channel(&self, k: usize) -> Self {
        self.map(|p| p.hbar_channel(k))
    }

    pub fn chop(&self, tol: f64) -> Self {
        self.map(|p| p.chop(tol))
    }

    /// Numeric matrix of the `ħ^k` channel evaluated at the point `x`.
    pub fn evaluate_channel(&self, k: usize, x: &[Complex64]) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |i, j| self.get(i, j).evaluate(x).coeff(k))
    }

    /// `ħ^k` channel at `x = (1, …, 1)`, where realised words reduce to the
    /// plain representation matrices.
    pub fn evaluate_ones(&self, k: usize) -> CMatrix {
        self.evaluate_channel(k, &vec![Complex64::new(1.0, 0.0); self.nvars])
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Polynomial::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &PolyMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn entry_product(env: &Enveloping, a: &Polynomial, b: &Polynomial, mode: ProductMode, trunc: Option<usize>) -> Result<Polynomial> {
    match (mode, trunc) {
        (ProductMode::Pointwise, None) => Ok(a * b),
        (ProductMode::Pointwise, Some(k)) => Ok((a * b).truncate_hbar(k)),
        (ProductMode::Star, None) => gutt_star(env, a, b),
        (ProductMode::Star, Some(k)) => star_truncated(env, a, b, k),
    }
}

fn multiply_impl(env: &Enveloping, f: &PolyMatrix, g: &PolyMatrix, mode: ProductMode, trunc: Option<usize>) -> Result<PolyMatrix> {
    f.check_shape(g)?;
    if mode == ProductMode::Star && f.nvars != env.dim() {
        return Err(Error::domain("star mode needs one variable per algebra generator"));
    }
    let d = f.d;
    let mut out = PolyMatrix::zeros(d, f.nvars);
    for i in 0..d {
        for k in 0..d {
            let mut acc = Polynomial::zero(f.nvars);
            for m in 0..d {
                let (a, b) = (f.get(i, m), g.get(m, k));
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc.add_assign_poly(&entry_product(env, a, b, mode, trunc)?);
            }
            out.entries[i * d + k] = acc;
        }
    }
    if let Some(deg) = out.degree() {
        env.check_degree(deg)?;
    }
    Ok(out)
}

/// `(FG)_{jk} = Σ_m F_{jm} ∘ G_{mk}` with `∘` the pointwise or star product.
pub fn poly_matrix_multiply(env: &Enveloping, f: &PolyMatrix, g: &PolyMatrix, mode: ProductMode) -> Result<PolyMatrix> {
    multiply_impl(env, f, g, mode, None)
}

/// As [`poly_matrix_multiply`], dropping ħ powers above `k`.
pub fn poly_matrix_multiply_truncated(
    env: &Enveloping,
    f: &PolyMatrix,
    g: &PolyMatrix,
    mode: ProductMode,
    k: usize,
) -> Result<PolyMatrix> {
    multiply_impl(env, f, g, mode, Some(k))
}

/// Product `T_{a_1}⋯T_{a_k}` in the fundamental representation.
pub fn word_matrix(g: &LieAlgebraData, word: &[usize]) -> CMatrix {
    let d = g.rep_dim();
    word.iter()
        .fold(CMatrix::identity(d, d), |acc, &a| acc * &g.basis()[a])
}

/// `X_a ↦ x^a T_a`, extended to words by the pointwise matrix product.
///
/// The pointwise product of `x^{a_i} T_{a_i}` factors collapses to the single
/// term `x^{a_1}⋯x^{a_k} · T_{a_1}⋯T_{a_k}`, which is what is built here.
pub fn realize(g: &LieAlgebraData, e: &UeaElement) -> Result<PolyMatrix> {
    if e.deformation() == Deformation::Quantum {
        return Err(Error::domain(
            "realize takes classical elements; quantum products go through star mode",
        ));
    }
    let (d, dim) = (g.rep_dim(), g.dim());
    let mut out = PolyMatrix::zeros(d, dim);
    for (w, c) in e.terms() {
        let term = PolyMatrix::from_term(&word_matrix(g, w.indices()), dim, w, c);
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Numeric image under the representation, `X_a ↦ T_a`; equals [`realize`]
/// evaluated at `x = (1, …, 1)`. Coefficients must be ħ-free.
pub fn represent(g: &LieAlgebraData, e: &UeaElement) -> Result<CMatrix> {
    let d = g.rep_dim();
    let mut out = CMatrix::zeros(d, d);
    for (w, c) in e.terms() {
        if c.order().unwrap_or(0) > 0 {
            return Err(Error::domain("cannot represent an element with ħ-dependent coefficients"));
        }
        out += word_matrix(g, w.indices()) * c.coeff(0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::build_su;

    #[test]
    fn identity_is_neutral() {
        let g = build_su(2).unwrap();
        let env = Enveloping::new(&g);
        let r = realize(&g, &env.word(&[0, 1], Deformation::Classical).unwrap()).unwrap();
        let id = PolyMatrix::identity(2, 3);
        for mode in [ProductMode::Pointwise, ProductMode::Star] {
            assert!(poly_matrix_multiply(&env, &id, &r, mode).unwrap().max_abs_diff(&r) < 1e-15);
            assert!(poly_matrix_multiply(&env, &r, &id, mode).unwrap().max_abs_diff(&r) < 1e-15);
        }
    }

    #[test]
    fn constant_matrices_multiply_numerically() {
        let g = build_su(3).unwrap();
        let env = Enveloping::new(&g);
        let (a, b) = (&g.basis()[1], &g.basis()[4]);
        let p = poly_matrix_multiply(&env, &PolyMatrix::from_matrix(a, 8), &PolyMatrix::from_matrix(b, 8), ProductMode::Pointwise).unwrap();
        assert!(crate::linalg::max_abs_diff(&p.evaluate_ones(0), &(a * b)) < 1e-15);
        assert_eq!(p.degree(), Some(0));
    }

    #[test]
    fn realize_examples() {
        let g = build_su(2).unwrap();
        let env = Enveloping::new(&g);
        let x1 = UeaElement::generator(Deformation::Classical, 0);
        let r1 = realize(&g, &x1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = Polynomial::term(3, Monomial::var(0), HbarPoly::constant(g.basis()[0][(i, j)]));
                assert_eq!(*r1.get(i, j), expect);
            }
        }
        assert_eq!(realize(&g, &UeaElement::unit(Deformation::Classical)).unwrap(), PolyMatrix::identity(2, 3));
        let w = env.word(&[0, 1], Deformation::Classical).unwrap();
        let rw = realize(&g, &w).unwrap();
        assert_eq!(rw.degree(), Some(2));
        assert!(rw.entries().iter().all(|p| p.terms().keys().all(|m| m.degree() == 2)));
        // the word realisation is the pointwise product of the generator realisations
        let r2 = realize(&g, &UeaElement::generator(Deformation::Classical, 1)).unwrap();
        let prod = poly_matrix_multiply(&env, &r1, &r2, ProductMode::Pointwise).unwrap();
        assert!(prod.max_abs_diff(&rw) < 1e-15);
        assert!(realize(&g, &UeaElement::generator(Deformation::Quantum, 0)).is_err());
    }

    #[test]
    fn star_commutator_hbar0_is_pointwise_commutator() {
        let g = build_su(2).unwrap();
        let env = Enveloping::new(&g);
        let r = |a| realize(&g, &UeaElement::generator(Deformation::Classical, a)).unwrap();
        let (r1, r2) = (r(0), r(1));
        let star = poly_matrix_multiply(&env, &r1, &r2, ProductMode::Star)
            .unwrap()
            .sub(&poly_matrix_multiply(&env, &r2, &r1, ProductMode::Star).unwrap())
            .unwrap();
        let point = poly_matrix_multiply(&env, &r1, &r2, ProductMode::Pointwise)
            .unwrap()
            .sub(&poly_matrix_multiply(&env, &r2, &r1, ProductMode::Pointwise).unwrap())
            .unwrap();
        assert!(star.hbar_channel(0).max_abs_diff(&point) < 1e-15);
        // the ħ term is (iħ/2) x^3 {T_1, T_2}, and Pauli matrices anticommute
        assert!(star.hbar_channel(1).max_abs() < 1e-15);
    }

    #[test]
    fn represent_is_realize_at_ones() {
        let g = build_su(3).unwrap();
        let env = Enveloping::new(&g);
        let e = env.word(&[5, 2, 7], Deformation::Classical).unwrap();
        let num = represent(&g, &e).unwrap();
        assert!(crate::linalg::max_abs_diff(&num, &realize(&g, &e).unwrap().evaluate_ones(0)) < 1e-14);
        let direct = &g.basis()[5] * &g.basis()[2] * &g.basis()[7];
        assert!(crate::linalg::max_abs_diff(&num, &direct) < 1e-14);
    }
}
