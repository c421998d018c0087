use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cohomology::{build_cocycle, multibracket_tensor};
use crate::dynamics::{FlowProblem, HamiltonianSlot};
use crate::enveloping::{Deformation, Enveloping, Monomial, UeaElement};
use crate::error::{Error, Result};
use crate::lie_core::{build_su, LieAlgebraData, Root, RootSystemData};
use crate::linalg::{commutator, elementary, max_abs_diff, CMatrix, I};

/// Positions closer than this count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// `n` parallel branes, each with a point in the transverse space.
#[derive(Clone, Debug)]
pub struct BraneStack {
    positions: Vec<Vec<f64>>,
    algebra: LieAlgebraData,
}

impl BraneStack {
    pub fn new(positions: Vec<Vec<f64>>) -> Result<Self> {
        let n = positions.len();
        let algebra = build_su(n)?;
        let width = positions[0].len();
        if width == 0 {
            return Err(Error::domain("branes need at least one transverse direction"));
        }
        if positions.iter().any(|p| p.len() != width) {
            return Err(Error::domain("brane positions have differing lengths"));
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("brane positions must be finite"));
        }
        Ok(Self { positions, algebra })
    }

    /// All `n` branes at the origin of a `transverse`-dimensional space.
    pub fn coincident(n: usize, transverse: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; transverse]; n.max(1)])
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn transverse_dim(&self) -> usize {
        self.positions[0].len()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn algebra(&self) -> &LieAlgebraData {
        &self.algebra
    }

    /// `X_t = diag(x_{t,1}, …, x_{t,n})`, one per transverse direction.
    pub fn position_matrices(&self) -> Vec<CMatrix> {
        let n = self.n();
        (0..self.transverse_dim())
            .map(|t| {
                CMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        Complex64::new(self.positions[i][t], 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect()
    }

    /// Moves every brane by the same vector.
    pub fn translate(&self, displacement: &[f64]) -> Result<Self> {
        self.check_vector(displacement)?;
        let positions = self
            .positions
            .iter()
            .map(|p| p.iter().zip(displacement).map(|(a, b)| a + b).collect())
            .collect();
        Ok(Self {
            positions,
            algebra: self.algebra.clone(),
        })
    }

    fn check_vector(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.transverse_dim() {
            return Err(Error::domain(format!(
                "displacement has {} components, the stack has {} transverse directions",
                v.len(),
                self.transverse_dim()
            )));
        }
        Ok(())
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.positions[i]
            .iter()
            .zip(&self.positions[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Unbroken gauge algebra of a stack.
///
/// The overall `u(1)` (centre-of-mass motion) is stripped: `u1_count` counts
/// only relative `u(1)` factors, so a fully separated stack of `n` reports
/// `n − 1` of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub n: usize,
    /// Brane indices (1-based) grouped by coincident position.
    pub clusters: Vec<Vec<usize>>,
    /// Sizes `m ≥ 2` of the `su(m)` factors.
    pub su_factors: Vec<usize>,
    pub u1_count: usize,
    pub label: String,
    pub unbroken_roots: Vec<String>,
    pub removed_generators: Vec<String>,
    pub retained_cartan: Vec<String>,
    pub dimension: usize,
    /// Dimension of the centraliser of the position matrices in su(n),
    /// computed numerically as a null space.
    pub centraliser_dimension: usize,
}

fn cluster(stack: &BraneStack) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..stack.n() {
        match clusters
            .iter_mut()
            .find(|c| stack.distance(c[0], i) <= COINCIDENCE_TOL)
        {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    clusters
}

pub fn symmetry_report(stack: &BraneStack) -> SymmetryReport {
    let n = stack.n();
    let clusters = cluster(stack);
    let mut su_factors: Vec<usize> = clusters.iter().map(Vec::len).filter(|m| *m >= 2).collect();
    su_factors.sort_unstable_by(|a, b| b.cmp(a));
    let u1_count = clusters.len() - 1;
    let mut parts: Vec<String> = su_factors.iter().map(|m| format!("su({m})")).collect();
    parts.extend(std::iter::repeat_n("u(1)".to_string(), u1_count));
    let label = if parts.is_empty() { "0".to_string() } else { parts.join("⊕") };

    let mut unbroken_roots = Vec::new();
    let mut removed_generators = Vec::new();
    let mut unbroken_positive = 0;
    for i in 0..n {
        for j in i + 1..n {
            let r = Root::new(i, j);
            if stack.distance(i, j) <= COINCIDENCE_TOL {
                unbroken_positive += 1;
                unbroken_roots.push(r.label());
                unbroken_roots.push(r.negate().label());
            } else {
                removed_generators.push(format!("e_{}", r.label()));
                removed_generators.push(format!("e_{}", r.negate().label()));
            }
        }
    }
    let retained_cartan = (0..n - 1).map(|k| format!("h_α{}", k + 1)).collect();
    SymmetryReport {
        n,
        clusters: clusters
            .into_iter()
            .map(|c| c.into_iter().map(|i| i + 1).collect())
            .collect(),
        su_factors,
        u1_count,
        label,
        unbroken_roots,
        removed_generators,
        retained_cartan,
        dimension: 2 * unbroken_positive + n - 1,
        centraliser_dimension: centraliser_dimension(stack),
    }
}

/// `dim {Y ∈ su(n) : [X_t, Y] = 0 for all t}` via the singular values of the
/// stacked real-linear map `Y ↦ ([X_t, Y])_t`.
pub fn centraliser_dimension(stack: &BraneStack) -> usize {
    let g = stack.algebra();
    let xs = stack.position_matrices();
    let d = g.rep_dim();
    let rows = 2 * d * d * xs.len();
    let mut map = DMatrix::<f64>::zeros(rows, g.dim());
    for (a, ta) in g.basis().iter().enumerate() {
        let mut r = 0;
        for x in &xs {
            for z in commutator(x, ta).iter() {
                map[(r, a)] = z.re;
                map[(r + 1, a)] = z.im;
                r += 2;
            }
        }
    }
    let sv = map.svd(false, false).singular_values;
    let scale = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-10 * scale.max(1.0)).count();
    g.dim() - rank
}

/// Moves brane `k` (1-based) by `displacement` and reports what survives.
pub fn separate_brane(stack: &BraneStack, k: usize, displacement: &[f64]) -> Result<(BraneStack, SymmetryReport)> {
    if k == 0 || k > stack.n() {
        return Err(Error::domain(format!("brane index {k} outside 1..={}", stack.n())));
    }
    stack.check_vector(displacement)?;
    if displacement.iter().all(|x| *x == 0.0) {
        return Err(Error::domain("displacement must be nonzero"));
    }
    let mut positions = stack.positions.clone();
    for (p, dx) in positions[k - 1].iter_mut().zip(displacement) {
        *p += dx;
    }
    let moved = BraneStack {
        positions,
        algebra: stack.algebra.clone(),
    };
    let report = symmetry_report(&moved);
    Ok((moved, report))
}

/// An open string between two branes, labelled by its root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringRecord {
    pub root: String,
    /// Brane indices, 1-based, in the orientation of the root.
    pub endpoints: (usize, usize),
    pub length: f64,
    pub stretched: bool,
}

/// One record per positive root `e_j − e_k`; with `include_negative`, each
/// is followed by its oppositely oriented partner.
pub fn string_spectrum(stack: &BraneStack, include_negative: bool) -> Vec<StringRecord> {
    let n = stack.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let length = stack.distance(i, j);
            let stretched = length > COINCIDENCE_TOL;
            let r = Root::new(i, j);
            out.push(StringRecord {
                root: r.label(),
                endpoints: (i + 1, j + 1),
                length,
                stretched,
            });
            if include_negative {
                out.push(StringRecord {
                    root: r.negate().label(),
                    endpoints: (j + 1, i + 1),
                    length,
                    stretched,
                });
            }
        }
    }
    out
}

/// Discretised transverse action
/// `Σ_i a · [ Σ_t tr(D X_t† D X_t) + ½ Σ_{t≠t'} tr(C_{tt'}† C_{tt'}) ]`,
/// with `C_{tt'} = [X_t, X_{t'}]` and `D X = ∂X + i[A, X]`.
///
/// `∂` is the central difference on a periodic grid of spacing `a`. Both
/// terms are written as `tr(M†M)`, so the value is real and the potential is
/// nonnegative whatever the hermiticity convention of the fields.
pub fn transverse_lagrangian(gauge: &[CMatrix], fields: &[Vec<CMatrix>], spacing: f64) -> Result<f64> {
    let npts = gauge.len();
    if npts == 0 || fields.len() != npts {
        return Err(Error::domain(format!(
            "{} gauge matrices for {} grid points",
            npts,
            fields.len()
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::domain("grid spacing must be positive"));
    }
    let d = gauge[0].nrows();
    let ndir = fields[0].len();
    for (a, xs) in gauge.iter().zip(fields) {
        if a.shape() != (d, d) || xs.len() != ndir || xs.iter().any(|x| x.shape() != (d, d)) {
            return Err(Error::domain("inconsistent field shapes across the grid"));
        }
    }
    let hs = |m: &CMatrix| m.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut total = 0.0;
    for i in 0..npts {
        let (next, prev) = ((i + 1) % npts, (i + npts - 1) % npts);
        let mut density = 0.0;
        for t in 0..ndir {
            let deriv = (&fields[next][t] - &fields[prev][t]) / Complex64::new(2.0 * spacing, 0.0);
            let cov = deriv + commutator(&gauge[i], &fields[i][t]) * I;
            density += hs(&cov);
            for s in 0..ndir {
                if s != t {
                    density += 0.5 * hs(&commutator(&fields[i][t], &fields[i][s]));
                }
            }
        }
        total += spacing * density;
    }
    Ok(total)
}

/// The family `H_1^±, …, H_{n−1}^±`.
#[derive(Clone, Debug)]
pub struct HamiltonianFamily {
    slots: Vec<HamiltonianSlot>,
}

impl HamiltonianFamily {
    /// In the order `H_1^+, H_1^-, H_2^+, …`.
    pub fn slots(&self) -> &[HamiltonianSlot] {
        &self.slots
    }

    /// `H_j^+`, 1-based.
    pub fn plus(&self, j: usize) -> &HamiltonianSlot {
        &self.slots[2 * (j - 1)]
    }

    /// `H_j^-`, 1-based.
    pub fn minus(&self, j: usize) -> &HamiltonianSlot {
        &self.slots[2 * (j - 1) + 1]
    }

    /// `G_{ij} = tr(H_i† H_j)`, real for self-adjoint entries.
    pub fn gram(&self) -> DMatrix<f64> {
        let k = self.slots.len();
        DMatrix::from_fn(k, k, |i, j| {
            (self.slots[i].matrix.adjoint() * &self.slots[j].matrix).trace().re
        })
    }

    /// Numerical rank and condition number of the Gram matrix.
    pub fn gram_rank(&self) -> (usize, f64) {
        let sv = self.gram().svd(false, false).singular_values;
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let rank = sv.iter().filter(|s| **s > 1e-12 * max).count();
        (rank, max / min)
    }

    /// Rank of the words as vectors over the PBW basis. In the fundamental
    /// representation every member is diagonal, so the matrix rank is capped
    /// at `n`; the words themselves stay independent.
    pub fn word_rank(&self) -> usize {
        let mut words: Vec<&Monomial> = self.slots.iter().flat_map(|s| s.word.terms().keys()).collect();
        words.sort();
        words.dedup();
        let mut m = DMatrix::<f64>::zeros(2 * words.len(), self.slots.len());
        for (col, s) in self.slots.iter().enumerate() {
            for (row, w) in words.iter().enumerate() {
                let z = s.word.coefficient(w.indices()).coeff(0);
                m[(2 * row, col)] = z.re;
                m[(2 * row + 1, col)] = z.im;
            }
        }
        let sv = m.svd(false, false).singular_values;
        let max = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|s| **s > 1e-12 * max).count()
    }
}

/// `H_j^± = ½ Σ_{l≤j} (e_{α_l} e_{−α_l} ± e_{−α_l} e_{α_l})` for the simple
/// roots `α_l`, as enveloping-algebra words and as matrices.
///
/// Matrices are built from elementary matrices directly, so `H_j^-` has
/// exactly zero off-diagonal entries; the words are checked against them.
pub fn build_hamiltonians(g: &LieAlgebraData, rs: &RootSystemData) -> Result<HamiltonianFamily> {
    let n = rs.n;
    if g.rep_dim() != n {
        return Err(Error::domain("root system and algebra differ in rank"));
    }
    let env = Enveloping::new(g);
    let word_of = |m: &CMatrix| -> Result<UeaElement> {
        Ok(UeaElement::linear(Deformation::Classical, &g.decompose(m)?.coeffs))
    };
    let mut slots = Vec::with_capacity(2 * (n - 1));
    for j in 1..n {
        for sign in [1.0, -1.0] {
            let mut word = UeaElement::zero(Deformation::Classical);
            let mut matrix = CMatrix::zeros(n, n);
            for l in 0..j {
                let (up, down) = (elementary(n, l, l + 1), elementary(n, l + 1, l));
                let (wu, wd) = (word_of(&up)?, word_of(&down)?);
                let sym = env
                    .multiply(&wu, &wd)?
                    .add(&env.multiply(&wd, &wu)?.scale(Complex64::new(sign, 0.0)))?;
                word = word.add(&sym)?;
                matrix += &up * &down + (&down * &up) * Complex64::new(sign, 0.0);
            }
            let word = word.scale(Complex64::new(0.5, 0.0));
            let matrix = matrix * Complex64::new(0.5, 0.0);
            let label = format!("H_{}^{}", j, if sign > 0.0 { "+" } else { "-" });
            let slot = HamiltonianSlot::new(g, label, word)?;
            if max_abs_diff(&slot.matrix, &matrix) > 1e-12 {
                return Err(Error::domain(format!("word for {} does not reproduce its matrix", slot.label)));
            }
            slots.push(HamiltonianSlot { matrix, ..slot });
        }
    }
    Ok(HamiltonianFamily { slots })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Plus,
    Minus,
}

/// Flow of the top cocycle `ω_{2n−1}` with slots `H_1^+, H_1^-, …,
/// H_{n−2}^+, H_{n−2}^-` followed by `H_{n−1}^±` as chosen by `orientation`.
pub fn orientation_flows(g: &LieAlgebraData, rs: &RootSystemData, orientation: Orientation) -> Result<FlowProblem> {
    let n = rs.n;
    let family = build_hamiltonians(g, rs)?;
    let cocycle = build_cocycle(g, 2 * n - 1)?;
    let tensor = multibracket_tensor(&cocycle, g)?;
    let mut slots = Vec::with_capacity(2 * n - 3);
    for j in 1..n - 1 {
        slots.push(family.plus(j).clone());
        slots.push(family.minus(j).clone());
    }
    slots.push(match orientation {
        Orientation::Plus => family.plus(n - 1).clone(),
        Orientation::Minus => family.minus(n - 1).clone(),
    });
    FlowProblem::new(g, &tensor, slots)
}
