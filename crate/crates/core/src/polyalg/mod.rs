//! Homogeneous polynomial maps `R^m -> R^d` in the monomial basis.
//!
//! Monomials of a fixed degree are ordered graded-lexicographically with
//! `x1` most significant: for `m = 2, n = 2` the basis is
//! `x1^2, x1 x2, x2^2`. Coefficient vectors of a `d`-valued map are the
//! concatenation of the per-coordinate vectors in that order.

mod hompoly;
mod multiindex;
mod multilinear;

pub use hompoly::{
    compose_general, compose_linear, continuity_bound, derivative_polynomial, hompoly_derivative,
    hompoly_eval, ln_matrix, HomPolyMap, Term,
};
pub use multiindex::{monomial_count, monomials, MultiIndex};
pub use multilinear::{polarize, SymMultilinear};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 6;
/// Largest supported domain dimension for user-constructed polynomials.
pub const MAX_DIM: usize = 6;

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `j (j-1) ... (j-n+1)`.
pub(crate) fn falling_factorial(j: usize, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (j - k) as f64)
}
