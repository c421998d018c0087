//! Generalised Poisson multibrackets on su(n): cocycles, enveloping-algebra
//! star products, multibracket flows and D-brane symmetry breaking.

pub mod branes;
pub mod checks;
pub mod cli;
pub mod cohomology;
pub mod dynamics;
pub mod enveloping;
pub mod error;
pub mod lie_core;
pub mod linalg;

pub use error::{Error, Result};
