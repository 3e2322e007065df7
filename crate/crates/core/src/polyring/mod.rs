//! Exact sparse multivariate polynomials over arbitrary-precision integers,
//! plus symbolic determinants and minors of polynomial matrices.

mod format;
mod matrix;
mod poly;

pub use format::{parse_poly, PolyJson, TermJson};
pub use matrix::{combinations, integer_determinant, rational_rank, PolyMatrix};
pub use poly::{coefficient_vars, display_names, Monomial, MultiPoly};
