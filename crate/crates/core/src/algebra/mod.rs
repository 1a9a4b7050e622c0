//! Complex scalars and dense square matrices: the unital algebra the fractions take values in.

mod matrix;
mod scalar;

pub use matrix::{mat_inverse, mat_mul, mat_norm, Matrix};
pub use scalar::{Backend, GaussianRational, Scalar, SINGULAR_TOL};
pub use num_complex::Complex64;
