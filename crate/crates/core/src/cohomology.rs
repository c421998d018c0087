//! Odd cocycles `ω_{2j+1}` of su(n) built from antisymmetrised traces in the
//! fundamental representation, the `2j`-fold multibrackets obtained by raising
//! their last index, and the generalised Jacobi identity check.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_core::LieAlgebraData;
use crate::linalg::{random_unit_vector, CMatrix};

/// Raw antisymmetrised traces below this are treated as exact zeros.
const RAW_ZERO: f64 = 1e-12;

/// Sorts `idx`, returning the sorted tuple and the permutation sign, or `None`
/// if an index repeats.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Identifies the algebra a tensor was built on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraId {
    pub n: usize,
    pub dim: usize,
}

impl AlgebraId {
    pub fn of(g: &LieAlgebraData) -> Self {
        Self {
            n: g.n(),
            dim: g.dim(),
        }
    }
}

/// Fully antisymmetric form stored on strictly increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    order: usize,
    algebra: AlgebraId,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl Cocycle {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut BTreeMap<Vec<usize>, f64> {
        &mut self.entries
    }

    /// Value on an arbitrary index tuple, signed by the sorting permutation.
    pub fn get(&self, idx: &[usize]) -> f64 {
        if idx.len() != self.order {
            return 0.0;
        }
        match sort_with_sign(idx) {
            Some((sorted, sign)) => self.entries.get(&sorted).map_or(0.0, |v| sign * v),
            None => 0.0,
        }
    }

    /// Multilinear evaluation on `order` coefficient vectors.
    pub fn evaluate(&self, xs: &[&[f64]]) -> f64 {
        assert_eq!(xs.len(), self.order);
        self.entries
            .iter()
            .map(|(s, v)| v * minor_det(xs, s))
            .sum()
    }

    pub fn to_json(&self) -> CocycleJson {
        CocycleJson {
            n: self.algebra.n,
            dim: self.algebra.dim,
            order: self.order,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

/// JSON layout emitted by the `cocycle` subcommand.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleJson {
    pub n: usize,
    pub dim: usize,
    pub order: usize,
    pub entries: Vec<(Vec<usize>, f64)>,
}

/// `det[X_i^{s_m}]` for the rows `xs` restricted to the columns `s`.
fn minor_det<T: ComplexField<RealField = f64> + Copy>(xs: &[&[T]], s: &[usize]) -> T {
    let k = s.len();
    match k {
        1 => xs[0][s[0]],
        2 => xs[0][s[0]] * xs[1][s[1]] - xs[0][s[1]] * xs[1][s[0]],
        _ => DMatrix::from_fn(k, k, |i, m| xs[i][s[m]]).determinant(),
    }
}

fn valid_orders(n: usize) -> String {
    (1..n).map(|j| (2 * j + 1).to_string()).join(", ")
}

pub fn build_cocycle(g: &LieAlgebraData, order: usize) -> Result<Cocycle> {
    let n = g.n();
    if order < 3 || order.is_multiple_of(2) || order > 2 * n - 1 {
        return Err(Error::domain(format!(
            "cocycle order must be odd with 3 <= order <= {} for su({n}) (valid: {{{}}}), got {order}",
            2 * n - 1,
            valid_orders(n)
        )));
    }
    let raw = antisymmetrised_traces(g, order);

    let entries: BTreeMap<Vec<usize>, f64> = if order == 3 {
        // Σ_σ sgn σ tr(T_σ(a) T_σ(b) T_σ(c)) = 3 tr(T_a [T_b, T_c]) = -(3/2) f_abc
        // when κ = -2 tr, so -2/3 recovers the lowered structure constants.
        raw.into_iter()
            .map(|(k, z)| (k, z.re * (-2.0 / 3.0)))
            .collect()
    } else {
        let max = raw.values().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = raw
            .values()
            .find(|z| z.norm() >= max * (1.0 - 1e-12))
            .copied()
            .ok_or_else(|| Error::domain(format!("cocycle of order {order} vanishes")))?;
        raw.into_iter()
            .map(|(k, z)| {
                let v = z / pivot;
                debug_assert!(v.im.abs() < 1e-9, "normalised cocycle not real: {v}");
                (k, v.re)
            })
            .collect()
    };
    if entries.is_empty() {
        return Err(Error::domain(format!("cocycle of order {order} vanishes")));
    }
    Ok(Cocycle {
        order,
        algebra: AlgebraId::of(g),
        entries,
    })
}

/// `Σ_σ sgn σ tr(T_{s_σ(1)} ⋯ T_{s_σ(k)})` for every increasing `k`-tuple `s`,
/// dropping values below [`RAW_ZERO`].
///
/// Builds antisymmetrised products level by level through
/// `A(S) = Σ_i (-1)^i T_{s_i} A(S \ s_i)`, so each level costs one product per
/// element per subset instead of `k!` products per subset.
fn antisymmetrised_traces(g: &LieAlgebraData, k: usize) -> BTreeMap<Vec<usize>, Complex64> {
    let dim = g.dim();
    let basis = g.basis();
    let mask = |s: &[usize]| s.iter().fold(0u64, |m, &i| m | (1u64 << i));

    let mut level: HashMap<u64, CMatrix> = (0..dim).map(|a| (1u64 << a, basis[a].clone())).collect();
    for m in 2..k {
        let subsets: Vec<Vec<usize>> = (0..dim).combinations(m).collect();
        let next: Vec<(u64, CMatrix)> = subsets
            .par_iter()
            .map(|s| {
                let full = mask(s);
                let d = g.rep_dim();
                let mut acc = CMatrix::zeros(d, d);
                for (i, &a) in s.iter().enumerate() {
                    let rest = &level[&(full & !(1u64 << a))];
                    let term = &basis[a] * rest;
                    if i % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                (full, acc)
            })
            .collect();
        level = next.into_iter().collect();
    }

    let tops: Vec<Vec<usize>> = (0..dim).combinations(k).collect();
    let values: Vec<Complex64> = tops
        .par_iter()
        .map(|s| {
            let full = mask(s);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &a) in s.iter().enumerate() {
                let rest = &level[&(full & !(1u64 << a))];
                let t = trace_product(&basis[a], rest);
                if i % 2 == 0 {
                    acc += t;
                } else {
                    acc -= t;
                }
            }
            acc
        })
        .collect();
    tops.into_iter()
        .zip(values)
        .filter(|(_, z)| z.norm() > RAW_ZERO)
        .collect()
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

/// `C_{a_1…a_{2j}}^b`, antisymmetric in the lower indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MultibracketTensor {
    arity: usize,
    algebra: AlgebraId,
    parent_order: usize,
    entries: BTreeMap<Vec<usize>, Vec<(usize, f64)>>,
}

impl MultibracketTensor {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim
    }

    /// Order of the cocycle this tensor was raised from.
    pub fn parent_order(&self) -> usize {
        self.parent_order
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Vec<(usize, f64)>> {
        &self.entries
    }

    /// Removes one stored component `C_S^b` (and with it all its lower-index
    /// permutations). Used to build deliberately broken fixtures.
    pub fn remove_component(&mut self, lower: &[usize], upper: usize) -> bool {
        let Some((sorted, _)) = sort_with_sign(lower) else {
            return false;
        };
        let Some(list) = self.entries.get_mut(&sorted) else {
            return false;
        };
        let before = list.len();
        list.retain(|(b, _)| *b != upper);
        let removed = list.len() != before;
        if list.is_empty() {
            self.entries.remove(&sorted);
        }
        removed
    }

    /// Adds `value` to `C_S^b` for the given ordering of `S`; the other
    /// orderings follow by antisymmetry. Used to build broken fixtures.
    pub fn add_component(&mut self, lower: &[usize], upper: usize, value: f64) -> bool {
        let Some((sorted, sign)) = sort_with_sign(lower) else {
            return false;
        };
        if sorted.len() != self.arity || sorted.iter().chain([&upper]).any(|i| *i >= self.dim()) {
            return false;
        }
        let list = self.entries.entry(sorted.clone()).or_default();
        match list.iter_mut().find(|(b, _)| *b == upper) {
            Some((_, v)) => *v += sign * value,
            None => {
                list.push((upper, sign * value));
                list.sort_by_key(|(b, _)| *b);
            }
        }
        list.retain(|(_, v)| *v != 0.0);
        if list.is_empty() {
            self.entries.remove(&sorted);
        }
        true
    }

    /// Upper-index components for an arbitrary ordering of the lower indices.
    pub fn components(&self, lower: &[usize]) -> Vec<(usize, f64)> {
        match sort_with_sign(lower) {
            Some((sorted, sign)) => self
                .entries
                .get(&sorted)
                .map(|v| v.iter().map(|(b, x)| (*b, sign * x)).collect())
                .unwrap_or_default(),
            None => Vec::new(),
        }
    }

    pub fn get(&self, lower: &[usize], upper: usize) -> f64 {
        self.components(lower)
            .into_iter()
            .find(|(b, _)| *b == upper)
            .map_or(0.0, |(_, v)| v)
    }

    fn check_args<T>(&self, xs: &[&[T]]) -> Result<()> {
        if xs.len() != self.arity {
            return Err(Error::domain(format!(
                "multibracket of arity {} given {} arguments",
                self.arity,
                xs.len()
            )));
        }
        if let Some(x) = xs.iter().find(|x| x.len() != self.dim()) {
            return Err(Error::domain(format!(
                "argument of length {} does not belong to an algebra of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `result^b = Σ C_{a_1…a_2j}^b X_1^{a_1} ⋯ X_2j^{a_2j}`.
    ///
    /// Sums over stored increasing tuples only; the antisymmetrised sum of the
    /// argument coefficients on a tuple is a determinant.
    pub fn apply<T: ComplexField<RealField = f64> + Copy>(&self, xs: &[&[T]]) -> Result<Vec<T>> {
        self.check_args(xs)?;
        let mut out = vec![T::zero(); self.dim()];
        for (s, comps) in &self.entries {
            let det = minor_det(xs, s);
            if det == T::zero() {
                continue;
            }
            for &(b, v) in comps {
                out[b] += det * T::from_real(v);
            }
        }
        Ok(out)
    }
}

pub fn multibracket_tensor(c: &Cocycle, g: &LieAlgebraData) -> Result<MultibracketTensor> {
    if c.algebra != AlgebraId::of(g) {
        return Err(Error::domain("cocycle was built on a different algebra"));
    }
    let k = c.order;
    let kinv = g.metric_inv();
    // lowered components ω(S, c) for increasing S and a free last index c:
    // moving position p of the stored tuple to the end costs (-1)^(k-1-p) = (-1)^p.
    let mut lowered: BTreeMap<Vec<usize>, BTreeMap<usize, f64>> = BTreeMap::new();
    for (t, v) in &c.entries {
        for p in 0..k {
            let mut s = t.clone();
            let last = s.remove(p);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            *lowered.entry(s).or_default().entry(last).or_insert(0.0) += sign * v;
        }
    }
    let mut entries = BTreeMap::new();
    for (s, low) in lowered {
        let mut comps = Vec::new();
        for b in 0..g.dim() {
            let v: f64 = low.iter().map(|(cc, w)| w * kinv[(*cc, b)]).sum();
            if v.abs() > 1e-14 {
                comps.push((b, v));
            }
        }
        if !comps.is_empty() {
            entries.insert(s, comps);
        }
    }
    Ok(MultibracketTensor {
        arity: k - 1,
        algebra: c.algebra,
        parent_order: k,
        entries,
    })
}

/// Real multibracket of `2j` coefficient vectors.
pub fn lie_multibracket(t: &MultibracketTensor, xs: &[&[f64]]) -> Result<Vec<f64>> {
    t.apply(xs)
}

/// `(4j-1 choose 2j)` shuffles: inner positions `I` (increasing), with sign
/// of the permutation `(I, complement)`.
fn shuffles(total: usize, inner: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    (0..total)
        .combinations(inner)
        .map(|ins| {
            let rest: Vec<usize> = (0..total).filter(|i| !ins.contains(i)).collect();
            let moves: usize = ins.iter().enumerate().map(|(k, &i)| i - k).sum();
            let sign = if moves.is_multiple_of(2) { 1.0 } else { -1.0 };
            (ins, rest, sign)
        })
        .collect()
}

fn random_elements(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| random_unit_vector(dim, rng)).collect()
}

fn nested(t: &MultibracketTensor, xs: &[Vec<f64>], inner: &[usize], outer: &[usize]) -> Vec<f64> {
    let args: Vec<&[f64]> = inner.iter().map(|&i| xs[i].as_slice()).collect();
    let y = t.apply(&args).expect("arity checked by caller");
    let mut args: Vec<&[f64]> = vec![y.as_slice()];
    args.extend(outer.iter().map(|&i| xs[i].as_slice()));
    t.apply(&args).expect("arity checked by caller")
}

/// Max-norm of the shuffle-antisymmetrised nested multibracket over random
/// unit-norm arguments, maximised over `trials`.
pub fn gji_residual(t: &MultibracketTensor, trials: usize, seed: u64) -> f64 {
    let p = t.arity();
    let total = 2 * p - 1;
    let sh = shuffles(total, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials.max(1) {
        let xs = random_elements(&mut rng, total, t.dim());
        let mut acc = vec![0.0; t.dim()];
        for (ins, rest, sign) in &sh {
            let v = nested(t, &xs, ins, rest);
            acc.iter_mut().zip(&v).for_each(|(a, b)| *a += sign * b);
        }
        worst = acc.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    worst
}

/// Same residual with the full `S_{4j-1}` antisymmetrisation, divided by
/// `(2j)! (2j-1)!`. Exponential in the arity; meant for small cases.
pub fn gji_residual_full(t: &MultibracketTensor, trials: usize, seed: u64) -> f64 {
    let p = t.arity();
    let total = 2 * p - 1;
    let norm: f64 = (1..=p).product::<usize>() as f64 * (1..p).product::<usize>() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials.max(1) {
        let xs = random_elements(&mut rng, total, t.dim());
        let mut acc = vec![0.0; t.dim()];
        for perm in (0..total).permutations(total) {
            let sign = sort_with_sign(&perm).map(|(_, s)| s).unwrap_or(0.0);
            let v = nested(t, &xs, &perm[..p], &perm[p..]);
            acc.iter_mut().zip(&v).for_each(|(a, b)| *a += sign * b);
        }
        worst = acc.iter().fold(worst, |m, v| m.max((v / norm).abs()));
    }
    worst
}

/// Chevalley–Eilenberg coboundary of the cocycle (trivial coefficients) on
/// random arguments: `Σ_{i<j} (-1)^{i+j} ω([Y_i, Y_j], Y_0, …, Ŷ_i, …, Ŷ_j, …)`.
pub fn coboundary_residual(c: &Cocycle, g: &LieAlgebraData, trials: usize, seed: u64) -> f64 {
    let k = c.order();
    let f = g.structure();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials.max(1) {
        let ys = random_elements(&mut rng, k + 1, g.dim());
        let mut acc = 0.0;
        for i in 0..=k {
            for j in i + 1..=k {
                let br = f.bracket(&ys[i], &ys[j]);
                let mut args: Vec<&[f64]> = vec![br.as_slice()];
                args.extend((0..=k).filter(|&m| m != i && m != j).map(|m| ys[m].as_slice()));
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * c.evaluate(&args);
            }
        }
        worst = worst.max(acc.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{build_su, EXACT_TOL};
    use rand::Rng;

    /// Brute-force antisymmetrised trace over all k! orderings.
    fn brute_raw(g: &LieAlgebraData, s: &[usize]) -> Complex64 {
        let k = s.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for perm in (0..k).permutations(k) {
            let sign = sort_with_sign(&perm).unwrap().1;
            let mut m = CMatrix::identity(g.rep_dim(), g.rep_dim());
            for &p in &perm {
                m *= &g.basis()[s[p]];
            }
            acc += m.trace() * sign;
        }
        acc
    }

    #[test]
    fn sign_sorting() {
        assert_eq!(sort_with_sign(&[0, 1, 2]), Some((vec![0, 1, 2], 1.0)));
        assert_eq!(sort_with_sign(&[1, 0, 2]), Some((vec![0, 1, 2], -1.0)));
        assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1.0)));
        assert_eq!(sort_with_sign(&[2, 0, 2]), None);
    }

    #[test]
    fn level_recursion_matches_brute_force() {
        let g = build_su(3).unwrap();
        let fast = antisymmetrised_traces(&g, 5);
        for s in (0..8).combinations(5) {
            let slow = brute_raw(&g, &s);
            let got = fast.get(&s).copied().unwrap_or_default();
            assert!((slow - got).norm() < 1e-12, "{s:?}: {slow} vs {got}");
        }
        assert!(fast.values().any(|z| z.norm() > 1e-8));
    }

    #[test]
    fn omega3_su2() {
        let g = build_su(2).unwrap();
        let w = build_cocycle(&g, 3).unwrap();
        assert!((w.get(&[0, 1, 2]) - 1.0).abs() < EXACT_TOL);
        assert!((w.get(&[1, 0, 2]) + 1.0).abs() < EXACT_TOL);
        assert_eq!(w.get(&[0, 0, 2]), 0.0);
    }

    #[test]
    fn omega3_matches_lowered_structure_constants() {
        for n in 2..=4 {
            let g = build_su(n).unwrap();
            let w = build_cocycle(&g, 3).unwrap();
            let dim = g.dim();
            for a in 0..dim {
                for b in 0..dim {
                    for cc in 0..dim {
                        let lowered: f64 = (0..dim)
                            .map(|e| g.structure().get(a, b, e) * g.metric()[(e, cc)])
                            .sum();
                        assert!((w.get(&[a, b, cc]) - lowered).abs() < EXACT_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn order_errors() {
        let g = build_su(2).unwrap();
        let e = build_cocycle(&g, 5).unwrap_err().to_string();
        assert!(e.contains("{3}"), "{e}");
        assert!(build_cocycle(&g, 4).is_err());
        assert!(build_cocycle(&g, 1).is_err());
        let g3 = build_su(3).unwrap();
        assert!(build_cocycle(&g3, 7).is_err());
    }

    #[test]
    fn every_order_nonzero_and_max_normalised() {
        for n in 2..=4 {
            let g = build_su(n).unwrap();
            for order in (3..=2 * n - 1).step_by(2) {
                let w = build_cocycle(&g, order).unwrap();
                assert!(!w.entries().is_empty());
                if order > 3 {
                    let max = w.entries().values().map(|v| v.abs()).fold(0.0, f64::max);
                    assert!((max - 1.0).abs() < EXACT_TOL);
                    assert!(w.entries().values().any(|v| (v - 1.0).abs() < EXACT_TOL));
                }
            }
        }
    }

    #[test]
    fn su2_multibracket_is_lie_bracket() {
        let g = build_su(2).unwrap();
        let t = multibracket_tensor(&build_cocycle(&g, 3).unwrap(), &g).unwrap();
        assert!((t.get(&[0, 1], 2) - 1.0).abs() < EXACT_TOL);
        assert!((t.get(&[1, 0], 2) + 1.0).abs() < EXACT_TOL);
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        let r = lie_multibracket(&t, &[&e(0), &e(1)]).unwrap();
        assert!((r[2] - 1.0).abs() < EXACT_TOL && r[0].abs() < EXACT_TOL && r[1].abs() < EXACT_TOL);
    }

    #[test]
    fn raised_tensor_matches_cocycle_with_metric() {
        let g = build_su(3).unwrap();
        let w = build_cocycle(&g, 5).unwrap();
        let t = multibracket_tensor(&w, &g).unwrap();
        assert_eq!(t.arity(), 4);
        for s in (0..8).combinations(4) {
            for b in 0..8 {
                let expect: f64 = (0..8)
                    .map(|cc| {
                        let mut idx = s.clone();
                        idx.push(cc);
                        w.get(&idx) * g.metric_inv()[(cc, b)]
                    })
                    .sum();
                assert!((t.get(&s, b) - expect).abs() < EXACT_TOL);
            }
        }
    }

    #[test]
    fn omega5_lower_antisymmetry_on_random_tuples() {
        let g = build_su(3).unwrap();
        let t = multibracket_tensor(&build_cocycle(&g, 5).unwrap(), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s: Vec<usize> = (0..4).map(|_| rng.gen_range(0..8)).collect();
            let b = rng.gen_range(0..8);
            let base = t.get(&s, b);
            for perm in (0..4).permutations(4) {
                let ps: Vec<usize> = perm.iter().map(|&i| s[i]).collect();
                let sign = sort_with_sign(&perm).unwrap().1;
                assert!((t.get(&ps, b) - sign * base).abs() < EXACT_TOL);
            }
        }
    }

    #[test]
    fn repeated_argument_vanishes_and_result_traceless() {
        let g = build_su(3).unwrap();
        let t = multibracket_tensor(&build_cocycle(&g, 5).unwrap(), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_unit_vector(8, &mut rng);
        let y = random_unit_vector(8, &mut rng);
        let z = random_unit_vector(8, &mut rng);
        let r = lie_multibracket(&t, &[&x, &y, &x, &z]).unwrap();
        assert!(r.iter().all(|v| v.abs() < EXACT_TOL));
        let w = random_unit_vector(8, &mut rng);
        let r = lie_multibracket(&t, &[&x, &y, &z, &w]).unwrap();
        assert!(g.element(&r).trace().norm() < EXACT_TOL);
    }

    #[test]
    fn argument_checks() {
        let g = build_su(2).unwrap();
        let t = multibracket_tensor(&build_cocycle(&g, 3).unwrap(), &g).unwrap();
        let x = vec![1.0; 3];
        let bad = vec![1.0; 8];
        assert!(lie_multibracket(&t, &[&x]).is_err());
        assert!(lie_multibracket(&t, &[&x, &bad]).is_err());
        let g3 = build_su(3).unwrap();
        let w3 = build_cocycle(&g3, 3).unwrap();
        assert!(multibracket_tensor(&w3, &g).is_err());
    }

    #[test]
    fn gji_holds() {
        for n in [2, 3] {
            let g = build_su(n).unwrap();
            let t = multibracket_tensor(&build_cocycle(&g, 3).unwrap(), &g).unwrap();
            assert!(gji_residual(&t, 20, 1) < 1e-10);
        }
        let g = build_su(3).unwrap();
        let t = multibracket_tensor(&build_cocycle(&g, 5).unwrap(), &g).unwrap();
        assert!(gji_residual(&t, 20, 1) < 1e-8);
        assert_eq!(gji_residual(&t, 3, 9), gji_residual(&t, 3, 9));
    }

    #[test]
    fn gji_detects_corruption() {
        let g = build_su(3).unwrap();
        let mut t = multibracket_tensor(&build_cocycle(&g, 5).unwrap(), &g).unwrap();
        let (s, comps) = t.entries().iter().next().map(|(s, c)| (s.clone(), c.clone())).unwrap();
        assert!(t.remove_component(&s, comps[0].0));
        let worst = (0..5).map(|seed| gji_residual(&t, 4, seed)).fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn shuffle_and_full_forms_agree() {
        // dropping a single su(2) constant still leaves a Lie algebra, so break su(3)
        let g = build_su(3).unwrap();
        let mut c = multibracket_tensor(&build_cocycle(&g, 3).unwrap(), &g).unwrap();
        assert!(c.remove_component(&[0, 1], 2));
        // a broken tensor gives a visibly nonzero residual; both forms must agree on it
        let (a, b) = (gji_residual(&c, 3, 4), gji_residual_full(&c, 3, 4));
        assert!(a > 1e-3);
        assert!((a - b).abs() < 1e-12);

        let mut t = multibracket_tensor(&build_cocycle(&g, 5).unwrap(), &g).unwrap();
        let (s, comps) = t.entries().iter().next().map(|(s, c)| (s.clone(), c.clone())).unwrap();
        t.remove_component(&s, comps[0].0);
        let (a, b) = (gji_residual(&t, 1, 2), gji_residual_full(&t, 1, 2));
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn cocycle_condition() {
        let g = build_su(3).unwrap();
        let w3 = build_cocycle(&g, 3).unwrap();
        assert!(coboundary_residual(&w3, &g, 50, 8) < 1e-8);
        let w5 = build_cocycle(&g, 5).unwrap();
        assert!(coboundary_residual(&w5, &g, 10, 8) < 1e-8);
        let mut broken = w3.clone();
        broken.entries_mut().insert(vec![0, 1, 3], 0.5);
        assert!(coboundary_residual(&broken, &g, 10, 8) > 1e-3);
    }
}
