//! Symmetrisation between polynomials on g* and U(g), the star product it
//! induces, the Kirillov bracket, and the constant-Ω Moyal product.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hbar::HbarPoly;
use super::polynomial::{Monomial, Polynomial};
use super::uea::{Deformation, Enveloping, Strategy, UeaElement};
use crate::error::{Error, Result};

/// Coefficients below this modulus are dropped from star-product output; they
/// are rounding residue of cancelling symmetrised terms.
pub const STAR_CHOP: f64 = 1e-14;

/// Lexicographic successor of a multiset permutation, in place.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn check_nvars(env: &Enveloping, p: &Polynomial) -> Result<()> {
    if p.nvars() != env.dim() {
        return Err(Error::domain(format!(
            "polynomial has {} variables but the algebra has dimension {}",
            p.nvars(),
            env.dim()
        )));
    }
    Ok(())
}

/// `x^{a_1}⋯x^{a_k} ↦ (1/k!) Σ_σ X_{a_σ(1)}⋯X_{a_σ(k)}`, normal-ordered.
///
/// Sums the distinct orderings of the multiset once each and divides by their
/// count, so the leading word keeps coefficient exactly 1.
pub fn symmetrize_monomial(env: &Enveloping, m: &Monomial, def: Deformation) -> Result<Arc<UeaElement>> {
    env.check_degree(m.degree())?;
    let key = (def, m.clone());
    if let Some(hit) = env.sym_cache.read().expect("cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let mut perm = m.indices().to_vec();
    let mut raw = Vec::new();
    loop {
        raw.push((perm.clone(), HbarPoly::one()));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let count = raw.len() as f64;
    let summed = env.normal_form(&raw, def, Strategy::Leftmost)?;
    let mut out = UeaElement::zero(def);
    for (w, c) in summed.terms() {
        out.add_term(w.clone(), &c.div_real(count));
    }
    let out = Arc::new(out);
    env.sym_cache
        .write()
        .expect("cache poisoned")
        .insert(key, out.clone());
    Ok(out)
}

pub fn symmetrize(env: &Enveloping, p: &Polynomial, def: Deformation) -> Result<UeaElement> {
    check_nvars(env, p)?;
    let mut out = UeaElement::zero(def);
    for (m, c) in p.terms() {
        for (w, v) in symmetrize_monomial(env, m, def)?.terms() {
            out.add_term(w.clone(), &(v * c));
        }
    }
    Ok(out)
}

/// Inverse of [`symmetrize`]: peels off the top-degree words one degree at a
/// time, subtracting their symmetrisations.
pub fn unsymmetrize(env: &Enveloping, e: &UeaElement) -> Result<Polynomial> {
    let def = e.deformation();
    let mut rest = e.clone();
    let mut out = Polynomial::zero(env.dim());
    while let Some(d) = rest.degree() {
        let top: Vec<(Monomial, HbarPoly)> = rest
            .terms()
            .iter()
            .filter(|(w, _)| w.degree() == d)
            .map(|(w, c)| (w.clone(), c.clone()))
            .collect();
        for (w, c) in top {
            let sym = symmetrize_monomial(env, &w, def)?;
            for (u, v) in sym.terms() {
                rest.add_term(u.clone(), &-&(v * &c));
            }
            // the leading coefficient of sym is exactly 1, so this is already zero
            rest.remove_term(&w);
            out.add_term(w, &c);
        }
    }
    Ok(out)
}

/// Star product obtained by transporting the quantum U(g) product through
/// symmetrisation.
pub fn gutt_star(env: &Enveloping, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    check_nvars(env, f)?;
    check_nvars(env, g)?;
    if let (Some(df), Some(dg)) = (f.degree(), g.degree()) {
        env.check_degree(df + dg)?;
    }
    let sf = symmetrize(env, f, Deformation::Quantum)?;
    let sg = symmetrize(env, g, Deformation::Quantum)?;
    let prod = env.multiply(&sf, &sg)?;
    let scale = f.max_abs().max(1.0) * g.max_abs().max(1.0);
    Ok(unsymmetrize(env, &prod)?.chop(STAR_CHOP * scale))
}

/// Star product truncated at `ħ^k`.
///
/// The `ħ^0` part of a star product is exactly the pointwise product, so it
/// is formed directly rather than through the symmetrisation round trip.
/// Higher channels come from [`gutt_star`] on the ħ-free channels of the
/// inputs.
pub fn star_truncated(env: &Enveloping, f: &Polynomial, g: &Polynomial, k: usize) -> Result<Polynomial> {
    check_nvars(env, f)?;
    check_nvars(env, g)?;
    let (Some(of), Some(og)) = (f.hbar_order(), g.hbar_order()) else {
        return Ok(Polynomial::zero(env.dim()));
    };
    let mut out = Polynomial::zero(env.dim());
    for i in 0..=of.min(k) {
        let fi = f.hbar_channel(i);
        if fi.is_zero() {
            continue;
        }
        for j in 0..=og.min(k - i) {
            let gj = g.hbar_channel(j);
            if gj.is_zero() {
                continue;
            }
            let shift = HbarPoly::monomial(Complex64::new(1.0, 0.0), i + j);
            out.add_assign_poly(&(&fi * &gj).scale_hbar(&shift));
            if i + j < k {
                let corr = gutt_star(env, &fi, &gj)?;
                for (m, c) in corr.terms() {
                    let higher = HbarPoly::from_coeffs(
                        c.coeffs().iter().enumerate().map(|(p, z)| if p == 0 { Complex64::new(0.0, 0.0) } else { *z }).collect(),
                    );
                    out.add_term(m.clone(), &(&higher * &shift).truncate(k));
                }
            }
        }
    }
    Ok(out)
}

/// `{f, g}(x) = Σ f_{jm}^k x^k ∂_j f ∂_m g`.
pub fn kirillov_bracket(env: &Enveloping, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    check_nvars(env, f)?;
    check_nvars(env, g)?;
    let dim = env.dim();
    let df: Vec<Polynomial> = (0..dim).map(|j| f.derivative(j)).collect();
    let dg: Vec<Polynomial> = (0..dim).map(|m| g.derivative(m)).collect();
    let mut out = Polynomial::zero(dim);
    for j in 0..dim {
        if df[j].is_zero() {
            continue;
        }
        for m in 0..dim {
            if dg[m].is_zero() {
                continue;
            }
            let pair = &df[j] * &dg[m];
            for &(k, v) in env.structure(j, m) {
                let xk = Polynomial::variable(dim, k).scale_real(v);
                out.add_assign_poly(&(&xk * &pair));
            }
        }
    }
    Ok(out)
}

/// `f ⋆ g = Σ_k (iħ)^k/k! Ω^{j_1 m_1}⋯Ω^{j_k m_k} ∂_{j_1…j_k} f ∂_{m_1…m_k} g`.
///
/// No factor ½ in the exponent: with the canonical 2-variable Ω the
/// commutator `x¹⋆x² − x²⋆x¹` is `2iħ`.
pub fn moyal_star(f: &Polynomial, g: &Polynomial, omega: &DMatrix<f64>) -> Result<Polynomial> {
    let n = f.nvars();
    if g.nvars() != n {
        return Err(Error::domain("variable count mismatch"));
    }
    if omega.nrows() != n || omega.ncols() != n {
        return Err(Error::domain(format!(
            "Ω must be {n}×{n}, got {}×{}",
            omega.nrows(),
            omega.ncols()
        )));
    }
    for i in 0..n {
        for j in 0..n {
            if (omega[(i, j)] + omega[(j, i)]).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "Ω is not antisymmetric at ({i}, {j})"
                )));
            }
        }
    }
    let nz: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|j| (0..n).map(move |m| (j, m)))
        .filter(|&(j, m)| omega[(j, m)] != 0.0)
        .map(|(j, m)| (j, m, omega[(j, m)]))
        .collect();

    let mut out = f * g;
    let mut pairs = vec![(f.clone(), g.clone())];
    let mut k = 0usize;
    let mut factorial = 1.0;
    while !pairs.is_empty() {
        k += 1;
        factorial *= k as f64;
        let mut next = Vec::new();
        for (a, b) in &pairs {
            for &(j, m, w) in &nz {
                let (da, db) = (a.derivative(j), b.derivative(m));
                if !da.is_zero() && !db.is_zero() {
                    next.push((da.scale_real(w), db));
                }
            }
        }
        let i_k = Complex64::new(0.0, 1.0).powu(k as u32) / factorial;
        let weight = HbarPoly::monomial(i_k, k);
        for (a, b) in &next {
            out.add_assign_poly(&(a * b).scale_hbar(&weight));
        }
        pairs = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::build_su;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn x(nv: usize, i: usize) -> Polynomial {
        Polynomial::variable(nv, i)
    }

    #[test]
    fn multiset_permutations() {
        let mut v = vec![0, 0, 1];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn symmetrize_examples() {
        let env = Enveloping::new(&build_su(2).unwrap());
        let s = symmetrize(&env, &x(3, 0), Deformation::Classical).unwrap();
        assert_eq!(s, UeaElement::generator(Deformation::Classical, 0));
        // X_1 X_2 = sym(x1 x2) + (iħ/2) X_3
        let w = env.word(&[0, 1], Deformation::Quantum).unwrap();
        let p = unsymmetrize(&env, &w).unwrap();
        let expect = &(&x(3, 0) * &x(3, 1)) + &x(3, 2).scale_hbar(&HbarPoly::monomial(c(0.0, 0.5), 1));
        assert!(p.max_abs_diff(&expect) < 1e-15, "{p}");
    }

    #[test]
    fn star_examples() {
        let env = Enveloping::new(&build_su(2).unwrap());
        let (x1, x2, x3) = (x(3, 0), x(3, 1), x(3, 2));
        let half = HbarPoly::monomial(c(0.0, 0.5), 1);
        let s12 = gutt_star(&env, &x1, &x2).unwrap();
        assert!(s12.max_abs_diff(&(&(&x1 * &x2) + &x3.scale_hbar(&half))) < 1e-15);
        assert_eq!(gutt_star(&env, &x1, &x1).unwrap(), &x1 * &x1);
        let comm = &s12 - &gutt_star(&env, &x2, &x1).unwrap();
        let expect = x3.scale_hbar(&HbarPoly::monomial(c(0.0, 1.0), 1));
        assert!(comm.max_abs_diff(&expect) < 1e-15);
        assert_eq!(kirillov_bracket(&env, &x1, &x2).unwrap(), x3);
        assert!(gutt_star(&env, &x(2, 0), &x1).is_err());
    }

    #[test]
    fn truncated_star_matches_full() {
        let env = Enveloping::new(&build_su(2).unwrap());
        let f = Polynomial::parse("(1,0) * x1^2 + (0.5,0) * x2^1 * x3^1", 3).unwrap();
        let g = Polynomial::parse("(1,0) * x2^2 + (2,0) * x1^1", 3).unwrap();
        let full = gutt_star(&env, &f, &g).unwrap();
        for k in 0..4 {
            let t = star_truncated(&env, &f, &g, k).unwrap();
            assert!(t.max_abs_diff(&full.truncate_hbar(k)) < 1e-13, "k = {k}");
        }
        assert_eq!(star_truncated(&env, &f, &g, 0).unwrap(), &f * &g);
    }

    #[test]
    fn moyal_examples() {
        let omega = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let (q, p) = (x(2, 0), x(2, 1));
        let comm = &moyal_star(&q, &p, &omega).unwrap() - &moyal_star(&p, &q, &omega).unwrap();
        assert_eq!(comm, Polynomial::constant(2, HbarPoly::monomial(c(0.0, 2.0), 1)));
        let zero = DMatrix::zeros(2, 2);
        let f = &(&q * &q) + &p;
        assert_eq!(moyal_star(&f, &p, &zero).unwrap(), &f * &p);
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(moyal_star(&q, &p, &bad).is_err());
    }
}
