//! Thiele-type interpolating continued fractions with matrix values.
//!
//! The fraction
//!
//! ```text
//! T_n(u) = F(u_0) + l_1(u - u_0) [I + l_2(u - u_1) [I + ... [I + l_n(u - u_{n-1})]^-1 ...]^-1]^-1
//! ```
//!
//! is stored as a base matrix plus one linear map per storey ([`fraction`]). Three builders
//! produce the maps:
//!
//! * [`scalar_builder`]: one complex argument, node values only (inverse differences);
//! * [`functional`]: real vector arguments and a callable matrix function, with each
//!   storey obtained by Gauss–Legendre quadrature of partial derivatives along the
//!   segment between consecutive nodes;
//! * [`continual`]: arguments are grid functions on `[0, 1]`, storeys are
//!   Stieltjes sums against a truncation family `g_τ`.
//!
//! [`exprlang`] parses the small expression language used to describe matrix functions
//! in input files, and [`io`] holds the JSON file formats.

pub mod algebra;
pub mod continual;
pub mod error;
pub mod exprlang;
pub mod fixtures;
pub mod fraction;
pub mod functional;
pub mod io;
pub mod quadrature;
pub mod scalar_builder;

pub use algebra::{Backend, Complex64, GaussianRational, Matrix, Scalar};
pub use error::{Error, Result};
pub use fraction::{ArgKind, ArgPoint, InverseSide, Payload, Residual, Storey, ThieleFraction};
