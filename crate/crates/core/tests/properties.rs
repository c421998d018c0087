use std::sync::OnceLock;

use liebrane::branes::{string_spectrum, symmetry_report, transverse_lagrangian, BraneStack};
use liebrane::cohomology::{build_cocycle, lie_multibracket, multibracket_tensor, MultibracketTensor};
use liebrane::dynamics::{integrate, leibniz_multibracket, FlowProblem, HamiltonianSlot, Slot};
use liebrane::enveloping::{
    gutt_star, kirillov_bracket, moyal_star, poly_matrix_multiply, realize, symmetrize, unsymmetrize, Deformation,
    Enveloping, HbarPoly, Monomial, Polynomial, ProductMode, Strategy as Rewrite, UeaElement,
};
use liebrane::lie_core::{build_su, LieAlgebraData};
use liebrane::linalg::{max_abs_diff, random_hermitian, random_unitary, CMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Fixture {
    g: LieAlgebraData,
    env: Enveloping,
    bracket: MultibracketTensor,
}

fn su2() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let g = build_su(2).unwrap();
        let bracket = multibracket_tensor(&build_cocycle(&g, 3).unwrap(), &g).unwrap();
        Fixture { env: Enveloping::new(&g), g, bracket }
    })
}

fn su3() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let g = build_su(3).unwrap();
        let bracket = multibracket_tensor(&build_cocycle(&g, 5).unwrap(), &g).unwrap();
        Fixture { env: Enveloping::new(&g), g, bracket }
    })
}

fn word(dim: usize, max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..dim, 1..=max)
}

/// Random su(2) element: a few normal-ordered words with real coefficients.
fn element(dim: usize, max: usize) -> impl Strategy<Value = UeaElement> {
    prop::collection::vec((word(dim, max), -1.0f64..1.0), 1..=3).prop_map(|terms| {
        let env = &su2().env;
        terms.into_iter().fold(UeaElement::zero(Deformation::Classical), |e, (w, c)| {
            let t = env.word(&w, Deformation::Classical).unwrap();
            e.add(&t.scale(Complex64::new(c, 0.0))).unwrap()
        })
    })
}

fn polynomial(nvars: usize, max_degree: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0..nvars, 0..=max_degree), -1.0f64..1.0), 1..=3).prop_map(
        move |terms| {
            let mut p = Polynomial::zero(nvars);
            for (m, c) in terms {
                p.add_term(Monomial::new(m), &HbarPoly::real(c));
            }
            p
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pbw_strategies_agree(w in word(8, 5)) {
        let f = su3();
        let raw = [(w, HbarPoly::one())];
        let l = f.env.normal_form(&raw, Deformation::Classical, Rewrite::Leftmost).unwrap();
        let r = f.env.normal_form(&raw, Deformation::Classical, Rewrite::Rightmost).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-12);
        prop_assert_eq!(f.env.renormalize(&l, Rewrite::Leftmost).unwrap(), l);
    }

    #[test]
    fn enveloping_product_associative(a in element(3, 3), b in element(3, 2), c in element(3, 2)) {
        let env = &su2().env;
        let left = env.multiply(&env.multiply(&a, &b).unwrap(), &c).unwrap();
        let right = env.multiply(&a, &env.multiply(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn symmetrization_round_trip(p in polynomial(3, 4)) {
        let env = &su2().env;
        let back = unsymmetrize(env, &symmetrize(env, &p, Deformation::Classical).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn kirillov_jacobi(f in polynomial(3, 2), g in polynomial(3, 2), h in polynomial(3, 2)) {
        let env = &su2().env;
        let br = |a: &Polynomial, b: &Polynomial| kirillov_bracket(env, a, b).unwrap();
        let sum = &(&br(&f, &br(&g, &h)) + &br(&g, &br(&h, &f))) + &br(&h, &br(&f, &g));
        prop_assert!(sum.max_abs() < 1e-12);
    }

    #[test]
    fn star_commutator_is_kirillov(f in polynomial(3, 3), g in polynomial(3, 3)) {
        let env = &su2().env;
        let comm = &gutt_star(env, &f, &g).unwrap() - &gutt_star(env, &g, &f).unwrap();
        let k = kirillov_bracket(env, &f, &g).unwrap().scale(Complex64::new(0.0, 1.0));
        prop_assert!(comm.hbar_channel(1).max_abs_diff(&k) < 1e-12);
        prop_assert!(gutt_star(env, &f, &g).unwrap().hbar_channel(0).max_abs_diff(&(&f * &g)) < 1e-12);
    }

    #[test]
    fn moyal_associative(f in polynomial(2, 3), g in polynomial(2, 3), h in polynomial(2, 3)) {
        let omega = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let s = |a: &Polynomial, b: &Polynomial| moyal_star(a, b, &omega).unwrap();
        prop_assert!(s(&s(&f, &g), &h).max_abs_diff(&s(&f, &s(&g, &h))) < 1e-12);
    }

    #[test]
    fn arity_two_matches_commutator_in_representation(a in element(3, 3), b in element(3, 3)) {
        let f = su2();
        let br = leibniz_multibracket(&f.env, &f.bracket, &[Slot::Element(a.clone()), Slot::Element(b.clone())]).unwrap();
        let (ra, rb) = (realize(&f.g, &a).unwrap(), realize(&f.g, &b).unwrap());
        let comm = poly_matrix_multiply(&f.env, &ra, &rb, ProductMode::Pointwise).unwrap()
            .sub(&poly_matrix_multiply(&f.env, &rb, &ra, ProductMode::Pointwise).unwrap()).unwrap();
        let lhs = realize(&f.g, &br).unwrap().evaluate_ones(0);
        prop_assert!(max_abs_diff(&lhs, &comm.evaluate_ones(0)) < 1e-10);
        // The abstract bracket is the commutator in U(g).
        let uc = f.env.multiply(&a, &b).unwrap().sub(&f.env.multiply(&b, &a).unwrap()).unwrap();
        prop_assert!(br.max_abs_diff(&uc) < 1e-12);
    }

    #[test]
    fn multibracket_antisymmetric(seed in 0u64..1000, i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let f = su3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..4).map(|_| liebrane::linalg::random_unit_vector(8, &mut rng)).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let mut swapped = refs.clone();
        swapped.swap(i, j);
        let a = lie_multibracket(&f.bracket, &refs).unwrap();
        let b = lie_multibracket(&f.bracket, &swapped).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x + y).abs() < 1e-12));
    }

    #[test]
    fn flow_time_reversal(seed in 0u64..1000) {
        let f = su2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = liebrane::linalg::random_unit_vector(3, &mut rng);
        let p = FlowProblem::new(&f.g, &f.bracket, vec![HamiltonianSlot::generator(&f.g, (seed % 3) as usize).unwrap()]).unwrap();
        let f0 = f.g.element(&x);
        let fwd = integrate(&p, &f0, 100, 0.01).unwrap();
        let back = integrate(&p, fwd.last(), 100, -0.01).unwrap();
        prop_assert!(max_abs_diff(back.last(), &f0) < 1e-6);
        let eig0 = fwd.monitor("eig1_im").unwrap();
        prop_assert!(eig0.iter().all(|e| (e - eig0[0]).abs() < 1e-6));
        let tr = fwd.monitor("trace_im").unwrap();
        prop_assert!(tr.iter().all(|t| (t - tr[0]).abs() < 1e-10));
    }

    #[test]
    fn lagrangian_gauge_invariant(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<CMatrix> = (0..4).map(|_| random_hermitian(2, &mut rng)).collect();
        let x: Vec<Vec<CMatrix>> = (0..4).map(|_| (0..3).map(|_| random_hermitian(2, &mut rng)).collect()).collect();
        let u = random_unitary(2, &mut rng);
        let conj = |m: &CMatrix| &u * m * u.adjoint();
        let v = transverse_lagrangian(&a, &x, 0.3).unwrap();
        let a2: Vec<_> = a.iter().map(conj).collect();
        let x2: Vec<Vec<_>> = x.iter().map(|xs| xs.iter().map(conj).collect()).collect();
        prop_assert!((transverse_lagrangian(&a2, &x2, 0.3).unwrap() - v).abs() < 1e-10 * v.max(1.0));
    }

    #[test]
    fn stretched_strings_match_broken_roots(pos in prop::collection::vec(0u8..3, 2..=5)) {
        let stack = BraneStack::new(pos.iter().map(|p| vec![f64::from(*p)]).collect()).unwrap();
        let r = symmetry_report(&stack);
        let stretched = string_spectrum(&stack, false).iter().filter(|s| s.stretched).count();
        prop_assert_eq!(2 * stretched, r.removed_generators.len());
        prop_assert_eq!(r.dimension, r.centraliser_dimension);
    }
}
