//! Numerical toolkit for bilinear averaging operators: shifted dyadic
//! lattices, grid functions, quadrature measures, the operators themselves,
//! sparse-form construction, exact exponent regions and verification suites.

// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dyadic;
pub mod exponents;
pub mod error;
pub mod grid;
pub mod measures;
pub mod operators;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
