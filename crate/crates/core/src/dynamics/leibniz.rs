use num_complex::Complex64;

use crate::cohomology::MultibracketTensor;
use crate::enveloping::{represent, word_matrix, Deformation, Enveloping, HbarPoly, Monomial, UeaElement};
use crate::error::{Error, Result};
use crate::lie_core::LieAlgebraData;
use crate::linalg::{commutator, CMatrix};

/// Residual norms above this flag a bracket evaluation as lossy.
pub const RESIDUAL_WARN: f64 = 1e-8;

/// A Hamiltonian supplied as an explicit generator word together with its
/// matrix in the fundamental representation.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSlot {
    pub label: String,
    pub word: UeaElement,
    pub matrix: CMatrix,
}

impl HamiltonianSlot {
    /// Builds the slot from a classical word; the matrix is its image under
    /// the representation.
    pub fn new(g: &LieAlgebraData, label: impl Into<String>, word: UeaElement) -> Result<Self> {
        if word.deformation() != Deformation::Classical {
            return Err(Error::domain("Hamiltonian words must be classical"));
        }
        let matrix = represent(g, &word)?;
        Ok(Self {
            label: label.into(),
            word,
            matrix,
        })
    }

    /// The single generator `X_a`, labelled `T_{a+1}`.
    pub fn generator(g: &LieAlgebraData, a: usize) -> Result<Self> {
        if a >= g.dim() {
            return Err(Error::domain(format!("generator index {a} out of range")));
        }
        Self::new(g, format!("T_{}", a + 1), UeaElement::generator(Deformation::Classical, a))
    }
}

/// One term of the derivation expansion of a word: the word
/// `pref · X_gen · suf` carrying `coeff`.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub coeff: Complex64,
    pub gen: usize,
    pub pref: Monomial,
    pub suf: Monomial,
}

/// Splits each word of `e` at every position. Degree-0 terms contribute
/// nothing: a derivation kills the unit.
pub(crate) fn pieces(e: &UeaElement) -> Vec<(HbarPoly, usize, Monomial, Monomial)> {
    let mut out = Vec::new();
    for (w, c) in e.terms() {
        let idx = w.indices();
        for p in 0..idx.len() {
            out.push((
                c.clone(),
                idx[p],
                Monomial::new(idx[..p].to_vec()),
                Monomial::new(idx[p + 1..].to_vec()),
            ));
        }
    }
    out
}

pub(crate) fn classical_pieces(e: &UeaElement) -> Result<Vec<Piece>> {
    pieces(e)
        .into_iter()
        .map(|(c, gen, pref, suf)| {
            if c.order().unwrap_or(0) > 0 {
                return Err(Error::domain("slot word has ħ-dependent coefficients"));
            }
            Ok(Piece {
                coeff: c.coeff(0),
                gen,
                pref,
                suf,
            })
        })
        .collect()
}

/// A slot of the abstract multibracket.
#[derive(Clone, Debug)]
pub enum Slot {
    /// Coefficient vector over the basis, i.e. a degree-1 element.
    Vector(Vec<Complex64>),
    Element(UeaElement),
}

/// Multibracket of enveloping-algebra arguments, extended from generators by
/// the Leibniz rule in every slot.
///
/// Each slot word `w_1⋯w_k` is expanded as `Σ_p w_1⋯w_{p-1} {…, w_p, …} w_{p+1}⋯w_k`
/// with slot 1 outermost, so a term reads `pref_1 pref_2 ⋯ [base] ⋯ suf_2 suf_1`.
/// Words are taken in PBW normal form; on normal words this fixes the
/// expansion uniquely.
pub fn leibniz_multibracket(env: &Enveloping, t: &MultibracketTensor, slots: &[Slot]) -> Result<UeaElement> {
    if slots.len() != t.arity() {
        return Err(Error::domain(format!(
            "multibracket of arity {} given {} slots",
            t.arity(),
            slots.len()
        )));
    }
    if t.dim() != env.dim() {
        return Err(Error::domain("tensor and enveloping algebra differ"));
    }
    let mut def = None;
    for s in slots {
        if let Slot::Element(e) = s {
            match def {
                None => def = Some(e.deformation()),
                Some(d) if d != e.deformation() => {
                    return Err(Error::domain("slots mix classical and quantum elements"))
                }
                _ => {}
            }
        }
    }
    let def = def.unwrap_or(Deformation::Classical);
    let mut expanded = Vec::with_capacity(slots.len());
    for s in slots {
        let e = match s {
            Slot::Vector(v) => {
                if v.len() != env.dim() {
                    return Err(Error::domain(format!(
                        "slot vector of length {} for dimension {}",
                        v.len(),
                        env.dim()
                    )));
                }
                UeaElement::linear(def, v)
            }
            Slot::Element(e) => e.clone(),
        };
        expanded.push(pieces(&e));
    }
    let mut gens = Vec::with_capacity(slots.len());
    expand_abstract(env, t, def, &expanded, &mut gens)
}

fn expand_abstract(
    env: &Enveloping,
    t: &MultibracketTensor,
    def: Deformation,
    slots: &[Vec<(HbarPoly, usize, Monomial, Monomial)>],
    gens: &mut Vec<usize>,
) -> Result<UeaElement> {
    let level = gens.len();
    if level == slots.len() {
        let mut base = UeaElement::zero(def);
        for (b, v) in t.components(gens) {
            base.add_term(Monomial::var(b), &HbarPoly::real(v));
        }
        return Ok(base);
    }
    let mut acc = UeaElement::zero(def);
    for (c, gen, pref, suf) in &slots[level] {
        if gens.contains(gen) {
            continue;
        }
        gens.push(*gen);
        let inner = expand_abstract(env, t, def, slots, gens)?;
        gens.pop();
        if inner.is_zero() {
            continue;
        }
        let p = env.word(pref.indices(), def)?;
        let s = env.word(suf.indices(), def)?;
        let term = env.product(&[&p, &inner, &s])?.scale_hbar(c);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `F·H − H·F`. For arity 2 the Leibniz extension of the Lie bracket is the
/// commutator on all of U(g), so this is the exact representation image of
/// the abstract binary bracket.
pub fn binary_bracket_matrix(f: &CMatrix, h: &HamiltonianSlot) -> Result<CMatrix> {
    if f.shape() != h.matrix.shape() {
        return Err(Error::domain(format!(
            "shape mismatch: {:?} vs {:?}",
            f.shape(),
            h.matrix.shape()
        )));
    }
    Ok(commutator(f, &h.matrix))
}

/// Result of a representation-level multibracket evaluation.
#[derive(Clone, Debug)]
pub struct BracketOutput {
    pub value: CMatrix,
    /// Norm of the part of `F` outside `span(T_a) ⊕ span(I)`, which does not
    /// enter the bracket.
    pub residual_norm: f64,
    pub warning: bool,
}

/// The linear map `F ↦ {F, H_2, …, H_2j}` on d×d matrices, stored through its
/// values `M_a` on the basis.
///
/// `F` enters through its decomposition: the g-part feeds the tensor, the
/// trace part is annihilated (derivations kill the unit).
#[derive(Clone, Debug)]
pub struct BracketOperator {
    g: LieAlgebraData,
    images: Vec<CMatrix>,
    linear_slots: bool,
}

impl BracketOperator {
    pub fn new(g: &LieAlgebraData, t: &MultibracketTensor, hams: &[HamiltonianSlot]) -> Result<Self> {
        if hams.len() + 1 != t.arity() {
            return Err(Error::domain(format!(
                "multibracket of arity {} needs {} Hamiltonians, got {}",
                t.arity(),
                t.arity() - 1,
                hams.len()
            )));
        }
        if t.dim() != g.dim() {
            return Err(Error::domain("tensor was built on a different algebra"));
        }
        let mut slots = Vec::with_capacity(hams.len());
        for h in hams {
            if h.matrix.shape() != (g.rep_dim(), g.rep_dim()) {
                return Err(Error::domain(format!("Hamiltonian {} has the wrong shape", h.label)));
            }
            let ps = classical_pieces(&h.word)?;
            let numeric: Vec<(Complex64, usize, Option<CMatrix>, Option<CMatrix>)> = ps
                .iter()
                .map(|p| {
                    let m = |w: &Monomial| (w.degree() > 0).then(|| word_matrix(g, w.indices()));
                    (p.coeff, p.gen, m(&p.pref), m(&p.suf))
                })
                .collect();
            slots.push(numeric);
        }
        let linear_slots = slots
            .iter()
            .all(|s| s.iter().all(|(_, _, p, q)| p.is_none() && q.is_none()));
        let images = (0..g.dim())
            .map(|a| {
                let mut gens = vec![a];
                expand_numeric(g, t, &slots, &mut gens)
            })
            .collect();
        Ok(Self {
            g: g.clone(),
            images,
            linear_slots,
        })
    }

    /// `M_a`, the bracket with `F = T_a`.
    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    /// True when every Hamiltonian word is of degree at most one.
    pub fn linear_slots(&self) -> bool {
        self.linear_slots
    }

    /// `Σ_a c_a M_a`, summed in basis order.
    pub fn apply_coeffs(&self, c: &[Complex64]) -> CMatrix {
        let d = self.g.rep_dim();
        let mut acc = CMatrix::zeros(d, d);
        for (m, ca) in self.images.iter().zip(c) {
            if *ca != Complex64::new(0.0, 0.0) {
                acc += m * *ca;
            }
        }
        acc
    }

    pub fn apply(&self, f: &CMatrix) -> Result<BracketOutput> {
        let dec = self.g.decompose(f)?;
        let residual_norm = dec.residual_norm();
        Ok(BracketOutput {
            value: self.apply_coeffs(&dec.coeffs),
            residual_norm,
            warning: residual_norm > RESIDUAL_WARN,
        })
    }
}

type NumericPiece = (Complex64, usize, Option<CMatrix>, Option<CMatrix>);

fn expand_numeric(g: &LieAlgebraData, t: &MultibracketTensor, slots: &[Vec<NumericPiece>], gens: &mut Vec<usize>) -> CMatrix {
    let d = g.rep_dim();
    let level = gens.len() - 1;
    if level == slots.len() {
        let mut base = CMatrix::zeros(d, d);
        for (b, v) in t.components(gens) {
            base += g.basis()[b].map(|z| z * v);
        }
        return base;
    }
    let mut acc = CMatrix::zeros(d, d);
    for (c, gen, pref, suf) in &slots[level] {
        if gens.contains(gen) {
            continue;
        }
        gens.push(*gen);
        let mut inner = expand_numeric(g, t, slots, gens);
        gens.pop();
        if let Some(p) = pref {
            inner = p * inner;
        }
        if let Some(s) = suf {
            inner *= s;
        }
        acc += inner * *c;
    }
    acc
}

/// `{F, H_2, …, H_2j}` evaluated in the representation.
pub fn multibracket_matrix(
    g: &LieAlgebraData,
    t: &MultibracketTensor,
    f: &CMatrix,
    hams: &[HamiltonianSlot],
) -> Result<BracketOutput> {
    BracketOperator::new(g, t, hams)?.apply(f)
}
