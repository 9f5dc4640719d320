//! Exact algebra over the Gaussian rationals `Q(i)`.
//!
//! [`HomoPoly`] is the homogeneous polynomial type every map is built from.
//! Its gcd is exact, so reduced forms are canonical and can be compared
//! structurally.

mod gaussian;
mod modp;
mod poly;
pub(crate) mod sparse;
mod text;
mod univ;

pub(crate) use modp::certify_coprime;
pub use gaussian::GaussianRational;
pub use poly::{HomoPoly, Monomial};
pub use text::{parse_coeff_expr, parse_terms, CoeffExpr, ParsedTerm};
pub use univ::{complex_roots, UniPoly};


use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("variable count mismatch: {0} vs {1}")]
    VariableCountMismatch(usize, usize),
    #[error("gcd of two zero polynomials is undefined")]
    BothZero,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}
