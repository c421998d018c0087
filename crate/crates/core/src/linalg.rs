//! Small dense complex-matrix helpers shared by every module.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Elementary matrix with a single unit entry at `(row, col)`.
pub fn elementary(d: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(row, col)] = Complex64::new(1.0, 0.0);
    m
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Entrywise scaling by a real factor. Kept separate from nalgebra's scalar
/// multiplication so matrix and polynomial states round identically.
pub fn scale_real(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * s)
}

/// Eigenvalues of a square complex matrix, sorted by real then imaginary part.
pub fn sorted_eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = match m.clone().eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => nalgebra::Schur::new(m.clone())
            .unpack()
            .1
            .diagonal()
            .iter()
            .copied()
            .collect(),
    };
    // Real parts within roundoff of each other count as equal, otherwise
    // anti-Hermitian inputs (all real parts ~1e-16) get a random order.
    let tol = 1e-9 * ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    ev.sort_by(|a, b| {
        if (a.re - b.re).abs() > tol {
            a.re.total_cmp(&b.re)
        } else {
            a.im.total_cmp(&b.im)
        }
    });
    ev
}

/// Haar-ish random unitary from the QR decomposition of a complex Gaussian-like matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on the QR sign convention
    let mut q = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&z + z.adjoint()).map(|x| x * 0.5)
}

/// Uniform draw from `[-1, 1]^dim`, rescaled to unit Euclidean norm.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigen_order_ignores_roundoff_in_real_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(3, &mut rng);
        let a = h * c(0.0, 1.0);
        let base = sorted_eigenvalues(&a);
        for _ in 0..20 {
            let u = random_unitary(3, &mut rng);
            let ev = sorted_eigenvalues(&(&u * &a * u.adjoint()));
            for (x, y) in ev.iter().zip(&base) {
                assert!((x - y).norm() < 1e-10, "{ev:?} vs {base:?}");
            }
        }
    }
}
