//! Concrete su(n): anti-Hermitian generalised Gell-Mann basis, real structure
//! constants, the invariant form, and the root data of the fundamental
//! representation.
//!
//! Conventions: `T_a = -(i/2) λ_a` with `λ_a` the generalised Gell-Mann
//! matrices (`tr λ_a λ_b = 2 δ_ab`), so that `κ_ab = -2 tr(T_a T_b) = δ_ab` and
//! `[T_a, T_b] = f_ab^c T_c` with real `f`. All indices are 0-based.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, commutator, elementary, trace, CMatrix};

pub const DEFAULT_MAX_N: usize = 8;

/// Tolerance for quantities that are exact up to rounding.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for accumulated residuals (Jacobi sums and the like).
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Entries with modulus below this are stored as exact zeros.
const CHOP: f64 = 1e-14;

/// Dense structure-constant tensor `f_ab^c`, stored row-major as `[a][b][c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    data: Vec<f64>,
}

impl StructureConstants {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    /// Overwrites a single slot. No antisymmetric partner is touched.
    pub fn set_raw(&mut self, a: usize, b: usize, c: usize, value: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = value;
    }

    /// Nonzero `(c, f_ab^c)` for fixed `(a, b)`.
    pub fn row(&self, a: usize, b: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let base = (a * self.dim + b) * self.dim;
        self.data[base..base + self.dim]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(c, v)| (c, *v))
    }

    /// Nonzero entries `(a, b, c, value)` in index order.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in 0..self.dim {
                out.extend(self.row(a, b).map(|(c, v)| (a, b, c, v)));
            }
        }
        out
    }

    /// Lie bracket of two coefficient vectors.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for a in 0..self.dim {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..self.dim {
                if y[b] == 0.0 {
                    continue;
                }
                for (c, v) in self.row(a, b) {
                    out[c] += v * x[a] * y[b];
                }
            }
        }
        out
    }

    /// Max-norm Jacobi residual over all basis quadruples `(a, b, c, e)`.
    pub fn jacobi_residual(&self) -> f64 {
        let dim = self.dim;
        let rows: Vec<Vec<(usize, f64)>> = (0..dim * dim)
            .map(|ab| self.row(ab / dim, ab % dim).collect())
            .collect();
        let row = |a: usize, b: usize| &rows[a * dim + b];
        let mut worst = 0.0f64;
        let mut acc = vec![0.0; dim];
        for a in 0..dim {
            for b in 0..dim {
                for cc in 0..dim {
                    acc.iter_mut().for_each(|x| *x = 0.0);
                    for &(x, y, z) in &[(a, b, cc), (b, cc, a), (cc, a, b)] {
                        for &(d, v) in row(x, y) {
                            for &(e, w) in row(d, z) {
                                acc[e] += v * w;
                            }
                        }
                    }
                    worst = acc.iter().fold(worst, |m, v| m.max(v.abs()));
                }
            }
        }
        worst
    }
}

/// su(n) in its fundamental representation.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraData {
    n: usize,
    basis: Vec<CMatrix>,
    f: StructureConstants,
    metric: DMatrix<f64>,
    metric_inv: DMatrix<f64>,
}

impl LieAlgebraData {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Algebra dimension `n² - 1`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Representation dimension (`n` for the fundamental).
    pub fn rep_dim(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.f
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn metric_inv(&self) -> &DMatrix<f64> {
        &self.metric_inv
    }

    /// `f_ab^c` with bounds checking.
    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> Result<f64> {
        let dim = self.dim();
        if a >= dim || b >= dim || c >= dim {
            return Err(Error::domain(format!(
                "structure constant index ({a}, {b}, {c}) out of range 0..{dim}"
            )));
        }
        Ok(self.f.get(a, b, c))
    }

    /// `Σ_a x^a T_a` for a real coefficient vector.
    pub fn element(&self, x: &[f64]) -> CMatrix {
        let d = self.rep_dim();
        let mut m = CMatrix::zeros(d, d);
        for (t, &xa) in self.basis.iter().zip(x) {
            if xa != 0.0 {
                m += t.map(|z| z * xa);
            }
        }
        m
    }

    /// `Σ_a x^a T_a` for a complex coefficient vector (complexified algebra).
    pub fn element_complex(&self, x: &[Complex64]) -> CMatrix {
        let d = self.rep_dim();
        let mut m = CMatrix::zeros(d, d);
        for (t, &xa) in self.basis.iter().zip(x) {
            if xa != Complex64::new(0.0, 0.0) {
                m += t * xa;
            }
        }
        m
    }

    /// Invariant form `⟨X, Y⟩ = -2 tr(XY)`.
    pub fn form(&self, x: &CMatrix, y: &CMatrix) -> Complex64 {
        trace(&(x * y)) * -2.0
    }

    /// Projects `m` onto `span(T_a) ⊕ span(I)` of the complexified algebra.
    pub fn decompose(&self, m: &CMatrix) -> Result<Decomposition> {
        let d = self.rep_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::domain(format!(
                "decompose expects a {d}x{d} matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dim = self.dim();
        let raw: Vec<Complex64> = self.basis.iter().map(|t| self.form(t, m)).collect();
        let coeffs: Vec<Complex64> = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| raw[b] * self.metric_inv[(a, b)])
                    .sum::<Complex64>()
            })
            .collect();
        let trace_part = trace(m);
        let mut residual = m - self.element_complex(&coeffs);
        for i in 0..d {
            residual[(i, i)] -= trace_part / d as f64;
        }
        Ok(Decomposition {
            coeffs,
            trace_part,
            residual,
        })
    }

    pub fn jacobi_residual(&self) -> f64 {
        self.f.jacobi_residual()
    }

    pub fn to_dump(&self) -> AlgebraDump {
        AlgebraDump {
            n: self.n,
            dim: self.dim(),
            basis: self
                .basis
                .iter()
                .map(|m| {
                    (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
            f: self
                .f
                .nonzero()
                .into_iter()
                .collect(),
            metric: "identity".to_string(),
        }
    }
}

/// Output of [`LieAlgebraData::decompose`]:
/// `M = Σ coeffs_a T_a + trace_part · I/d + residual`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub coeffs: Vec<Complex64>,
    pub trace_part: Complex64,
    pub residual: CMatrix,
}

impl Decomposition {
    /// Real coefficient vector, if every imaginary part is below `tol`.
    pub fn real_coeffs(&self, tol: f64) -> Option<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|z| (z.im.abs() <= tol).then_some(z.re))
            .collect()
    }

    pub fn residual_norm(&self) -> f64 {
        crate::linalg::frobenius(&self.residual)
    }
}

/// JSON layout of an algebra dump.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebraDump {
    pub n: usize,
    pub dim: usize,
    pub basis: Vec<Vec<Vec<[f64; 2]>>>,
    pub f: Vec<(usize, usize, usize, f64)>,
    pub metric: String,
}

/// Generalised Gell-Mann matrices in the conventional ordering
/// (`λ1 λ2 λ3` for su(2), the standard eight for su(3)).
fn gell_mann(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(n * n - 1);
    for k in 1..n {
        for j in 0..k {
            let mut s = CMatrix::zeros(n, n);
            s[(j, k)] = c(1.0, 0.0);
            s[(k, j)] = c(1.0, 0.0);
            out.push(s);
            let mut a = CMatrix::zeros(n, n);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            out.push(a);
        }
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(n, n);
        for m in 0..k {
            diag[(m, m)] = c(norm, 0.0);
        }
        diag[(k, k)] = c(-(k as f64) * norm, 0.0);
        out.push(diag);
    }
    out
}

pub fn build_su(n: usize) -> Result<LieAlgebraData> {
    build_su_with_max(n, DEFAULT_MAX_N)
}

pub fn build_su_with_max(n: usize, max_n: usize) -> Result<LieAlgebraData> {
    if n < 2 || n > max_n {
        return Err(Error::domain(format!(
            "su(n) requires 2 <= n <= {max_n}, got n = {n}"
        )));
    }
    let basis: Vec<CMatrix> = gell_mann(n)
        .into_iter()
        .map(|l| l * c(0.0, -0.5))
        .collect();
    let dim = basis.len();

    let form = |x: &CMatrix, y: &CMatrix| (trace(&(x * y)) * -2.0).re;
    let metric = DMatrix::from_fn(dim, dim, |a, b| form(&basis[a], &basis[b]));
    let metric_inv = metric
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("invariant form is singular"))?;

    // f_ab^c = κ^{cd} ⟨[T_a, T_b], T_d⟩, computed for a < b and mirrored so
    // antisymmetry holds exactly in storage.
    let mut f = StructureConstants::zeros(dim);
    for a in 0..dim {
        for b in a + 1..dim {
            let br = commutator(&basis[a], &basis[b]);
            let lowered: Vec<f64> = basis.iter().map(|t| form(&br, t)).collect();
            for cc in 0..dim {
                let mut v: f64 = (0..dim).map(|e| metric_inv[(cc, e)] * lowered[e]).sum();
                if v.abs() < CHOP {
                    v = 0.0;
                }
                if v != 0.0 {
                    f.set_raw(a, b, cc, v);
                    f.set_raw(b, a, cc, -v);
                }
            }
        }
    }

    Ok(LieAlgebraData {
        n,
        basis,
        f,
        metric,
        metric_inv,
    })
}

/// The root `e_i - e_j` (0-based brane/weight indices, `i != j`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn new(i: usize, j: usize) -> Self {
        debug_assert_ne!(i, j);
        Self { i, j }
    }

    pub fn is_positive(&self) -> bool {
        self.i < self.j
    }

    pub fn negate(&self) -> Self {
        Self {
            i: self.j,
            j: self.i,
        }
    }

    /// Integer coordinates in the `e_1 … e_n` basis.
    pub fn vector(&self, n: usize) -> Vec<i32> {
        let mut v = vec![0; n];
        v[self.i] = 1;
        v[self.j] = -1;
        v
    }

    /// Range of simple roots summing to this root: `α_lo + … + α_hi` (0-based).
    pub fn simple_span(&self) -> (usize, usize) {
        let (lo, hi) = if self.i < self.j {
            (self.i, self.j)
        } else {
            (self.j, self.i)
        };
        (lo, hi - 1)
    }

    /// Display label in simple-root notation with 1-based subscripts, e.g. `-(α1+α2)`.
    pub fn label(&self) -> String {
        let (lo, hi) = self.simple_span();
        let body = (lo..=hi)
            .map(|k| format!("α{}", k + 1))
            .collect::<Vec<_>>()
            .join("+");
        match (self.is_positive(), lo == hi) {
            (true, _) => body,
            (false, true) => format!("-{body}"),
            (false, false) => format!("-({body})"),
        }
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}-e{}", self.i + 1, self.j + 1)
    }
}

#[derive(Clone, Debug)]
pub struct RootSystemData {
    pub n: usize,
    pub simple_roots: Vec<Root>,
    pub positive_roots: Vec<Root>,
    /// Positive root `α` ↦ `e_α`.
    pub raising: BTreeMap<Root, CMatrix>,
    /// Positive root `α` ↦ `e_{-α}`.
    pub lowering: BTreeMap<Root, CMatrix>,
    /// Simple root `α` ↦ `h_α = [e_α, e_{-α}]`.
    pub cartan: BTreeMap<Root, CMatrix>,
}

impl RootSystemData {
    pub fn simple_root_vectors(&self) -> Vec<Vec<i32>> {
        self.simple_roots.iter().map(|r| r.vector(self.n)).collect()
    }

    /// Generator `e_β` for any root (positive or negative).
    pub fn generator(&self, root: Root) -> CMatrix {
        elementary(self.n, root.i, root.j)
    }
}

pub fn build_root_system(g: &LieAlgebraData) -> RootSystemData {
    let n = g.rep_dim();
    let simple_roots: Vec<Root> = (0..n - 1).map(|k| Root::new(k, k + 1)).collect();
    let positive_roots: Vec<Root> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| Root::new(i, j)))
        .collect();
    let raising = positive_roots
        .iter()
        .map(|&r| (r, elementary(n, r.i, r.j)))
        .collect::<BTreeMap<_, _>>();
    let lowering = positive_roots
        .iter()
        .map(|&r| (r, elementary(n, r.j, r.i)))
        .collect::<BTreeMap<_, _>>();
    let cartan = simple_roots
        .iter()
        .map(|r| (*r, commutator(&raising[r], &lowering[r])))
        .collect();
    RootSystemData {
        n,
        simple_roots,
        positive_roots,
        raising,
        lowering,
        cartan,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn su2_dimension_and_f123() {
        let g = build_su(2).unwrap();
        assert_eq!(g.dim(), 3);
        assert!((g.structure_constant(0, 1, 2).unwrap() - 1.0).abs() < EXACT_TOL);
        assert_eq!(g.structure_constant(0, 0, 2).unwrap(), 0.0);
        // T_a = -(i/2) σ_a
        let sigma2 = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        assert!(max_abs_diff(&g.basis()[1], &(sigma2 * c(0.0, -0.5))) < 1e-15);
    }

    #[test]
    fn out_of_range_n_names_bound() {
        let err = build_su(1).unwrap_err().to_string();
        assert!(err.contains("2 <= n <= 8"), "{err}");
        assert!(build_su(9).is_err());
        assert!(build_su_with_max(9, 9).is_ok());
    }

    #[test]
    fn structure_constant_index_error() {
        let g = build_su(2).unwrap();
        assert!(matches!(g.structure_constant(0, 1, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn basis_invariants() {
        for n in 2..=5 {
            let g = build_su(n).unwrap();
            assert_eq!(g.dim(), n * n - 1);
            for t in g.basis() {
                assert!(max_abs_diff(t, &-t.adjoint()) < EXACT_TOL);
                assert!(trace(t).norm() < EXACT_TOL);
            }
            let id = DMatrix::<f64>::identity(g.dim(), g.dim());
            assert!((g.metric() - &id).amax() < EXACT_TOL);
            assert!((g.metric() * g.metric_inv() - &id).amax() < EXACT_TOL);
            for a in 0..g.dim() {
                for b in 0..g.dim() {
                    let br = commutator(&g.basis()[a], &g.basis()[b]);
                    let mut rec = CMatrix::zeros(n, n);
                    for (cc, v) in g.structure().row(a, b) {
                        rec += g.basis()[cc].map(|z| z * v);
                    }
                    assert!(max_abs_diff(&br, &rec) < EXACT_TOL);
                    for cc in 0..g.dim() {
                        assert_eq!(g.structure().get(a, b, cc), -g.structure().get(b, a, cc));
                    }
                }
            }
        }
    }

    #[test]
    fn su3_f_totally_antisymmetric() {
        let g = build_su(3).unwrap();
        let f = g.structure();
        for a in 0..8 {
            for b in 0..8 {
                for cc in 0..8 {
                    let v = f.get(a, b, cc);
                    assert!((v + f.get(a, cc, b)).abs() < EXACT_TOL);
                    assert!((v - f.get(b, cc, a)).abs() < EXACT_TOL);
                }
            }
        }
        // f_123 = 1, f_458 = √3/2 in the Gell-Mann numbering
        assert!((f.get(0, 1, 2) - 1.0).abs() < EXACT_TOL);
        assert!((f.get(3, 4, 7) - 3f64.sqrt() / 2.0).abs() < EXACT_TOL);
    }

    #[test]
    fn jacobi_residuals() {
        assert!(build_su(2).unwrap().jacobi_residual() < EXACT_TOL);
        assert!(build_su(3).unwrap().jacobi_residual() < RESIDUAL_TOL);

        let g = build_su(2).unwrap();
        let mut f = g.structure().clone();
        f.set_raw(0, 1, 2, -1.0);
        assert!(f.jacobi_residual() > 0.1);
    }

    #[test]
    fn determinism() {
        assert_eq!(build_su(4).unwrap(), build_su(4).unwrap());
    }

    #[test]
    fn roots_su2() {
        let g = build_su(2).unwrap();
        let rs = build_root_system(&g);
        assert_eq!(rs.simple_root_vectors(), vec![vec![1, -1]]);
        let a = rs.simple_roots[0];
        assert_eq!(rs.raising[&a], elementary(2, 0, 1));
        assert_eq!(rs.lowering[&a], elementary(2, 1, 0));
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1., 0.), c(-1., 0.)]));
        assert_eq!(rs.cartan[&a], h);
    }

    #[test]
    fn roots_general() {
        for n in 2..=5 {
            let rs = build_root_system(&build_su(n).unwrap());
            assert_eq!(rs.positive_roots.len(), n * (n - 1) / 2);
            for a in &rs.simple_roots {
                let (e, f) = (&rs.raising[a], &rs.lowering[a]);
                assert_eq!(e.adjoint(), *f);
                let h = &rs.cartan[a];
                assert_eq!(*h, commutator(e, f));
                assert!(h.iter().enumerate().all(|(k, z)| k % (h.nrows() + 1) == 0 || *z == c(0.0, 0.0)));
                assert_eq!(trace(h), c(0.0, 0.0));
                assert_eq!(commutator(h, e), e * c(2.0, 0.0));
            }
        }
        let rs4 = build_root_system(&build_su(4).unwrap());
        assert_eq!(rs4.simple_root_vectors()[2], vec![0, 0, 1, -1]);
        assert_eq!(Root::new(0, 2).label(), "α1+α2");
        assert_eq!(Root::new(2, 0).label(), "-(α1+α2)");
    }

    #[test]
    fn decompose_examples() {
        let g = build_su(3).unwrap();
        let dec = g.decompose(&g.basis()[1]).unwrap();
        for (a, z) in dec.coeffs.iter().enumerate() {
            let expect = if a == 1 { 1.0 } else { 0.0 };
            assert!((z - c(expect, 0.0)).norm() < EXACT_TOL);
        }
        assert!(dec.trace_part.norm() < EXACT_TOL);
        assert!(max_abs(&dec.residual) < EXACT_TOL);

        let id = CMatrix::identity(3, 3);
        let dec = g.decompose(&id).unwrap();
        assert!(dec.coeffs.iter().all(|z| z.norm() < EXACT_TOL));
        assert!((dec.trace_part - c(3.0, 0.0)).norm() < EXACT_TOL);
        assert!(max_abs(&dec.residual) < EXACT_TOL);

        let dec = g.decompose(&elementary(3, 0, 2)).unwrap();
        assert!(dec.residual_norm() < EXACT_TOL);
        assert!(dec.real_coeffs(1e-12).is_none());

        assert!(g.decompose(&CMatrix::zeros(2, 2)).is_err());
        assert!(g.decompose(&CMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn decompose_reconstructs_random_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            let g = build_su(n).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let back = g.decompose(&g.element(&x)).unwrap().real_coeffs(EXACT_TOL).unwrap();
                for (u, v) in x.iter().zip(&back) {
                    assert!((u - v).abs() < EXACT_TOL);
                }
            }
        }
    }

    #[test]
    fn form_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = build_su(3).unwrap();
        let rand_el = |rng: &mut ChaCha8Rng| {
            let x: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            g.element(&x)
        };
        for _ in 0..100 {
            let (x, y, z) = (rand_el(&mut rng), rand_el(&mut rng), rand_el(&mut rng));
            let r = g.form(&commutator(&x, &z), &y) + g.form(&x, &commutator(&y, &z));
            assert!(r.norm() < RESIDUAL_TOL);
        }
    }

    #[test]
    fn dump_shape() {
        let g = build_su(2).unwrap();
        let dump = g.to_dump();
        assert_eq!(dump.dim, 3);
        assert_eq!(dump.basis.len(), 3);
        assert_eq!(dump.basis[0].len(), 2);
        // six nonzero f entries for su(2): ±1 on the permutations of (0,1,2)
        assert_eq!(dump.f.len(), 6);
    }
}
