//! The universal enveloping algebra in PBW normal form, polynomials on g*
//! with ħ-polynomial coefficients, the star products between them, and
//! matrices of polynomial coordinate functions.

mod hbar;
mod polymatrix;
mod polynomial;
mod star;
mod uea;

pub use hbar::HbarPoly;
pub use polymatrix::{
    poly_matrix_multiply, poly_matrix_multiply_truncated, realize, represent, word_matrix,
    PolyMatrix, ProductMode,
};
pub use polynomial::{Monomial, Polynomial};
pub use star::{
    gutt_star, kirillov_bracket, moyal_star, star_truncated, symmetrize, symmetrize_monomial,
    unsymmetrize, STAR_CHOP,
};
pub use uea::{Deformation, Enveloping, Strategy, UeaElement, DEFAULT_MAX_DEGREE};
