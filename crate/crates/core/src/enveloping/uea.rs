use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use super::hbar::HbarPoly;
use super::polynomial::Monomial;
use crate::error::{Error, Result};
use crate::lie_core::LieAlgebraData;

pub const DEFAULT_MAX_DEGREE: usize = 12;

/// Which commutation relation the enveloping algebra carries.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Deformation {
    /// `X_a X_b - X_b X_a = f_{ab}^c X_c`
    Classical,
    /// `X_a X_b - X_b X_a = iħ f_{ab}^c X_c`
    Quantum,
}

impl Deformation {
    /// Factor multiplying the structure constants in the rewriting rule.
    pub fn relation_factor(self) -> HbarPoly {
        match self {
            Deformation::Classical => HbarPoly::one(),
            Deformation::Quantum => HbarPoly::monomial(Complex64::new(0.0, 1.0), 1),
        }
    }
}

/// Which descending adjacent pair the rewriting step picks first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    #[default]
    Leftmost,
    Rightmost,
}

/// Element of U(g) in PBW normal form: sorted generator words with
/// ħ-polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct UeaElement {
    deformation: Deformation,
    terms: BTreeMap<Monomial, HbarPoly>,
}

impl UeaElement {
    pub fn zero(deformation: Deformation) -> Self {
        Self {
            deformation,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(deformation: Deformation) -> Self {
        Self::scalar(deformation, HbarPoly::one())
    }

    pub fn scalar(deformation: Deformation, c: HbarPoly) -> Self {
        let mut e = Self::zero(deformation);
        e.add_term(Monomial::unit(), &c);
        e
    }

    pub fn generator(deformation: Deformation, a: usize) -> Self {
        let mut e = Self::zero(deformation);
        e.add_term(Monomial::var(a), &HbarPoly::one());
        e
    }

    /// Linear combination `Σ c_a X_a`.
    pub fn linear(deformation: Deformation, coeffs: &[Complex64]) -> Self {
        let mut e = Self::zero(deformation);
        for (a, c) in coeffs.iter().enumerate() {
            e.add_term(Monomial::var(a), &HbarPoly::constant(*c));
        }
        e
    }

    pub fn deformation(&self) -> Deformation {
        self.deformation
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, HbarPoly> {
        &self.terms
    }

    pub fn coefficient(&self, word: &[usize]) -> HbarPoly {
        self.terms
            .get(&Monomial::new(word.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Adds `c` times an already sorted word.
    pub(crate) fn add_term(&mut self, word: Monomial, c: &HbarPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&word);
                }
            }
            None => {
                self.terms.insert(word, c.clone());
            }
        }
    }

    pub(crate) fn remove_term(&mut self, word: &Monomial) {
        self.terms.remove(word);
    }

    fn check_flag(&self, other: &UeaElement) -> Result<()> {
        if self.deformation != other.deformation {
            return Err(Error::domain(format!(
                "deformation mismatch: {:?} vs {:?}",
                self.deformation, other.deformation
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &UeaElement) -> Result<Self> {
        self.check_flag(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &UeaElement) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.scale_hbar(&HbarPoly::constant(c))
    }

    pub fn scale_hbar(&self, h: &HbarPoly) -> Self {
        let mut out = Self::zero(self.deformation);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), &(c * h));
        }
        out
    }

    pub fn chop(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.deformation);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), &c.chop(tol));
        }
        out
    }

    /// Largest coefficient modulus of `self - other`, ignoring the flags.
    pub fn max_abs_diff(&self, other: &UeaElement) -> f64 {
        let mut worst = 0.0f64;
        for (w, c) in &self.terms {
            worst = worst.max((c - &other.terms.get(w).cloned().unwrap_or_default()).max_abs());
        }
        for (w, c) in &other.terms {
            if !self.terms.contains_key(w) {
                worst = worst.max(c.max_abs());
            }
        }
        worst
    }
}

impl fmt::Display for UeaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c}]")?;
            for a in w.indices() {
                write!(f, " X{}", a + 1)?;
            }
        }
        Ok(())
    }
}

type NormalForm = Arc<BTreeMap<Monomial, HbarPoly>>;
type NfKey = (Deformation, Strategy, Vec<usize>);

/// The enveloping algebra of a fixed Lie algebra: structure constants in
/// rewriting form, the degree cap, and memo tables for normal forms and
/// symmetrised monomials.
///
/// Memoisation does not affect values: a cached entry is exactly what the
/// deterministic recursion would recompute.
pub struct Enveloping {
    dim: usize,
    /// `f_{ab}^c` as sparse lists indexed by `a * dim + b`.
    pairs: Vec<Vec<(usize, f64)>>,
    max_degree: usize,
    nf_cache: RwLock<HashMap<NfKey, NormalForm>>,
    pub(crate) sym_cache: RwLock<HashMap<(Deformation, Monomial), Arc<UeaElement>>>,
}

impl fmt::Debug for Enveloping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Enveloping")
            .field("dim", &self.dim)
            .field("max_degree", &self.max_degree)
            .finish_non_exhaustive()
    }
}

impl Enveloping {
    pub fn new(g: &LieAlgebraData) -> Self {
        Self::with_max_degree(g, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(g: &LieAlgebraData, max_degree: usize) -> Self {
        let dim = g.dim();
        let f = g.structure();
        let pairs = (0..dim * dim)
            .map(|ab| {
                let (a, b) = (ab / dim, ab % dim);
                (0..dim)
                    .map(|c| (c, f.get(a, b, c)))
                    .filter(|(_, v)| *v != 0.0)
                    .collect()
            })
            .collect();
        Self {
            dim,
            pairs,
            max_degree,
            nf_cache: RwLock::new(HashMap::new()),
            sym_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Nonzero `f_{ab}^c` as `(c, value)`.
    pub fn structure(&self, a: usize, b: usize) -> &[(usize, f64)] {
        &self.pairs[a * self.dim + b]
    }

    pub(crate) fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.max_degree {
            return Err(Error::DegreeOverflow {
                degree,
                cap: self.max_degree,
            });
        }
        Ok(())
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        if let Some(&a) = word.iter().find(|&&a| a >= self.dim) {
            return Err(Error::domain(format!(
                "generator index {a} out of range for dimension {}",
                self.dim
            )));
        }
        self.check_degree(word.len())
    }

    /// Normal form of a sum of arbitrary (possibly unsorted) words.
    pub fn normal_form(
        &self,
        raw: &[(Vec<usize>, HbarPoly)],
        deformation: Deformation,
        strategy: Strategy,
    ) -> Result<UeaElement> {
        let mut out = UeaElement::zero(deformation);
        for (word, c) in raw {
            self.check_word(word)?;
            for (w, v) in self.nf_word(word, deformation, strategy).iter() {
                out.add_term(w.clone(), &(v * c));
            }
        }
        Ok(out)
    }

    /// Normal form of a single word with unit coefficient.
    pub fn word(&self, word: &[usize], deformation: Deformation) -> Result<UeaElement> {
        self.normal_form(&[(word.to_vec(), HbarPoly::one())], deformation, Strategy::Leftmost)
    }

    /// Re-normalises an element (idempotent on normal forms).
    pub fn renormalize(&self, e: &UeaElement, strategy: Strategy) -> Result<UeaElement> {
        let raw: Vec<(Vec<usize>, HbarPoly)> = e
            .terms
            .iter()
            .map(|(w, c)| (w.indices().to_vec(), c.clone()))
            .collect();
        self.normal_form(&raw, e.deformation, strategy)
    }

    pub fn multiply(&self, a: &UeaElement, b: &UeaElement) -> Result<UeaElement> {
        a.check_flag(b)?;
        let mut out = UeaElement::zero(a.deformation);
        for (wa, ca) in &a.terms {
            for (wb, cb) in &b.terms {
                let mut word = wa.indices().to_vec();
                word.extend_from_slice(wb.indices());
                self.check_word(&word)?;
                let coeff = ca * cb;
                for (w, v) in self.nf_word(&word, a.deformation, Strategy::Leftmost).iter() {
                    out.add_term(w.clone(), &(v * &coeff));
                }
            }
        }
        Ok(out)
    }

    /// Product of a sequence of generators and elements, left to right.
    pub fn product(&self, factors: &[&UeaElement]) -> Result<UeaElement> {
        let Some((first, rest)) = factors.split_first() else {
            return Err(Error::domain("empty product"));
        };
        rest.iter()
            .try_fold((*first).clone(), |acc, f| self.multiply(&acc, f))
    }

    fn nf_word(&self, word: &[usize], def: Deformation, strategy: Strategy) -> NormalForm {
        let descent = match strategy {
            Strategy::Leftmost => (0..word.len().saturating_sub(1)).find(|&i| word[i] > word[i + 1]),
            Strategy::Rightmost => (0..word.len().saturating_sub(1))
                .rev()
                .find(|&i| word[i] > word[i + 1]),
        };
        let Some(i) = descent else {
            let mut m = BTreeMap::new();
            m.insert(Monomial::new(word.to_vec()), HbarPoly::one());
            return Arc::new(m);
        };
        let key = (def, strategy, word.to_vec());
        if let Some(hit) = self.nf_cache.read().expect("cache poisoned").get(&key) {
            return hit.clone();
        }

        // X_b X_a = X_a X_b + λ f_{ba}^c X_c  (b > a)
        let mut swapped = word.to_vec();
        swapped.swap(i, i + 1);
        let mut acc: BTreeMap<Monomial, HbarPoly> = (*self.nf_word(&swapped, def, strategy)).clone();
        let lambda = def.relation_factor();
        for &(c, f) in self.structure(word[i], word[i + 1]) {
            let mut sub = word[..i].to_vec();
            sub.push(c);
            sub.extend_from_slice(&word[i + 2..]);
            let factor = lambda.scale_real(f);
            for (w, v) in self.nf_word(&sub, def, strategy).iter() {
                let add = v * &factor;
                let entry = acc.entry(w.clone()).or_default();
                *entry += &add;
                if entry.is_zero() {
                    acc.remove(w);
                }
            }
        }
        let nf = Arc::new(acc);
        self.nf_cache
            .write()
            .expect("cache poisoned")
            .insert(key, nf.clone());
        nf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::build_su;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn su2_single_rewrite() {
        let env = Enveloping::new(&build_su(2).unwrap());
        // X_2 X_1 -> X_1 X_2 - X_3 (1-based labels, 0-based indices)
        let e = env.word(&[1, 0], Deformation::Classical).unwrap();
        assert_eq!(e.coefficient(&[0, 1]), HbarPoly::one());
        assert_eq!(e.coefficient(&[2]), HbarPoly::real(-1.0));
        assert_eq!(e.terms().len(), 2);
        let q = env.word(&[1, 0], Deformation::Quantum).unwrap();
        assert_eq!(q.coefficient(&[2]), HbarPoly::monomial(c(0.0, -1.0), 1));
    }

    #[test]
    fn sorted_word_unchanged_and_idempotent() {
        let env = Enveloping::new(&build_su(3).unwrap());
        let e = env.word(&[0, 2, 2, 5], Deformation::Quantum).unwrap();
        assert_eq!(e.terms().len(), 1);
        let messy = env.word(&[5, 1, 3, 0], Deformation::Quantum).unwrap();
        assert_eq!(env.renormalize(&messy, Strategy::Rightmost).unwrap(), messy);
    }

    #[test]
    fn products() {
        let env = Enveloping::new(&build_su(2).unwrap());
        let x = |a| UeaElement::generator(Deformation::Classical, a);
        let sq = env.multiply(&x(0), &x(0)).unwrap();
        assert_eq!(sq.coefficient(&[0, 0]), HbarPoly::one());
        let comm = env
            .multiply(&x(0), &x(1))
            .unwrap()
            .sub(&env.multiply(&x(1), &x(0)).unwrap())
            .unwrap();
        assert_eq!(comm, x(2));
        let one = UeaElement::unit(Deformation::Classical);
        assert_eq!(env.multiply(&one, &sq).unwrap(), sq);
        let q = UeaElement::generator(Deformation::Quantum, 0);
        assert!(env.multiply(&x(0), &q).is_err());
    }

    #[test]
    fn degree_cap() {
        let g = build_su(2).unwrap();
        let env = Enveloping::with_max_degree(&g, 3);
        let x = UeaElement::generator(Deformation::Classical, 0);
        let x3 = env.product(&[&x, &x, &x]).unwrap();
        match env.multiply(&x3, &x) {
            Err(Error::DegreeOverflow { degree: 4, cap: 3 }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
        assert!(env.word(&[7], Deformation::Classical).is_err());
    }
}
