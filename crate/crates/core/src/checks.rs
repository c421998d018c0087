//! Seeded random samples and the residual checks built on them.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cohomology::MultibracketTensor;
use crate::dynamics::{leibniz_multibracket, Slot};
use crate::enveloping::{
    gutt_star, kirillov_bracket, poly_matrix_multiply, realize, Deformation, Enveloping, HbarPoly, Monomial,
    PolyMatrix, Polynomial, ProductMode, Strategy, UeaElement,
};
use crate::error::Result;
use crate::lie_core::LieAlgebraData;

/// Unsorted generator word of length `1..=max_degree`.
pub fn random_raw_word<R: Rng + ?Sized>(dim: usize, max_degree: usize, rng: &mut R) -> Vec<usize> {
    let len = rng.gen_range(1..=max_degree);
    (0..len).map(|_| rng.gen_range(0..dim)).collect()
}

/// Classical element with up to `terms` PBW words of degree `≤ max_degree`
/// and coefficients in `[-1, 1]`.
pub fn random_element<R: Rng + ?Sized>(dim: usize, max_degree: usize, terms: usize, rng: &mut R) -> UeaElement {
    let mut e = UeaElement::zero(Deformation::Classical);
    for _ in 0..rng.gen_range(1..=terms) {
        let w = Monomial::new(random_raw_word(dim, max_degree, rng));
        e.add_term(w, &HbarPoly::real(rng.gen_range(-1.0..1.0)));
    }
    e
}

/// ħ-free polynomial with up to `terms` monomials of degree `≤ max_degree`.
pub fn random_polynomial<R: Rng + ?Sized>(nvars: usize, max_degree: usize, terms: usize, rng: &mut R) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for _ in 0..rng.gen_range(1..=terms) {
        let deg = rng.gen_range(0..=max_degree);
        let m = Monomial::new((0..deg).map(|_| rng.gen_range(0..nvars)).collect());
        p.add_term(m, &HbarPoly::real(rng.gen_range(-1.0..1.0)));
    }
    p
}

/// Largest coefficient difference between leftmost-first and rightmost-first
/// rewriting of random words.
pub fn pbw_confluence(env: &Enveloping, samples: usize, max_degree: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let w = random_raw_word(env.dim(), max_degree, &mut rng);
        let raw = [(w, HbarPoly::one())];
        let l = env.normal_form(&raw, Deformation::Classical, Strategy::Leftmost)?;
        let r = env.normal_form(&raw, Deformation::Classical, Strategy::Rightmost)?;
        worst = worst.max(l.max_abs_diff(&r));
    }
    Ok(worst)
}

/// `max |(f⋆g)⋆h − f⋆(g⋆h)|` over random triples.
pub fn star_associativity(env: &Enveloping, samples: usize, max_degree: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let [f, g, h] = [0, 1, 2].map(|_| random_polynomial(env.dim(), max_degree, 3, &mut rng));
        let left = gutt_star(env, &gutt_star(env, &f, &g)?, &h)?;
        let right = gutt_star(env, &f, &gutt_star(env, &g, &h)?)?;
        worst = worst.max(left.max_abs_diff(&right));
    }
    Ok(worst)
}

/// Residuals of the two leading-order star contracts over random pairs:
/// `ħ⁰(f⋆g) = fg` and `ħ¹(f⋆g − g⋆f) = i{f,g}`.
pub fn star_contracts(env: &Enveloping, samples: usize, max_degree: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut pointwise, mut bracket) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let f = random_polynomial(env.dim(), max_degree, 3, &mut rng);
        let g = random_polynomial(env.dim(), max_degree, 3, &mut rng);
        let fg = gutt_star(env, &f, &g)?;
        let gf = gutt_star(env, &g, &f)?;
        pointwise = pointwise.max(fg.hbar_channel(0).max_abs_diff(&(&f * &g)));
        let comm = (&fg - &gf).hbar_channel(1);
        let k = kirillov_bracket(env, &f, &g)?.scale(Complex64::new(0.0, 1.0));
        bracket = bracket.max(comm.max_abs_diff(&k));
    }
    Ok((pointwise, bracket))
}

/// Entrywise gap between `realize({A, B})` and the pointwise commutator of
/// `realize(A)`, `realize(B)` for an arity-2 tensor, both read at
/// `x = (1, …, 1)`.
///
/// As polynomials the two sides differ: `{X_1, X_2} = X_3` realises to
/// `x³ T_3`, while the commutator of realisations carries `x¹x² T_3`. The
/// identity holds after evaluation, i.e. in the representation.
pub fn correspondence_residual(
    g: &LieAlgebraData,
    env: &Enveloping,
    t: &MultibracketTensor,
    samples: usize,
    max_degree: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = random_element(g.dim(), max_degree, 2, &mut rng);
        let b = random_element(g.dim(), max_degree, 2, &mut rng);
        let lhs = realize(g, &leibniz_multibracket(env, t, &[Slot::Element(a.clone()), Slot::Element(b.clone())])?)?;
        let (ra, rb) = (realize(g, &a)?, realize(g, &b)?);
        let rhs: PolyMatrix = poly_matrix_multiply(env, &ra, &rb, ProductMode::Pointwise)?
            .sub(&poly_matrix_multiply(env, &rb, &ra, ProductMode::Pointwise)?)?;
        worst = worst.max(crate::linalg::max_abs_diff(&lhs.evaluate_ones(0), &rhs.evaluate_ones(0)));
    }
    Ok(worst)
}
