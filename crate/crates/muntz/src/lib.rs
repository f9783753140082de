//! Closed-form calculus and operator experiments for finite Müntz polynomials
//! on `[0, 1]`.
//!
//! The crate is organized around one data type, [`MuntzPoly`], a finite
//! expansion `Σ aₖ x^{λₖ}` with real coefficients and strictly increasing
//! nonnegative real exponents. Everything built on top of it stays in closed
//! form: the Volterra and Cesàro operators, their weighted variants and
//! finite-rank approximants ([`operators`]), certified sup and L¹ norms via
//! sign-change isolation ([`norms`]), essential-norm lower-bound experiments
//! ([`essential`]), and Bernstein-number estimation over lacunary exponent
//! subspaces ([`bernstein`]).

// Validation sites use `!(x > 0.0)` style comparisons on purpose: the
// negation rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod essential;
pub mod norms;
pub mod operators;
pub mod poly;
pub mod sampling;

mod error;

pub use error::{Error, Result};
pub use norms::{NormResult, RootList};
pub use poly::{ExponentRule, MuntzPoly, Term};
