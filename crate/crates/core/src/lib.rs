//! Numerical toolkit for bounded local identity ("blid") maps.
//!
//! The crate covers smooth cutoffs on the real line, blid maps on `R^m` and on
//! a sampled model of `C[0,1]`, extension of local maps to global ones, Borel
//! realization of finite jets, and solvers for the cohomological equation
//! `g(Ax) - g(x) = f(x)` with a hyperbolic linear `A`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod cohomo;
mod error;
pub mod fd;
pub mod funcspace;
pub mod germ;
pub mod polyalg;
pub mod rng;
pub mod selftest;

pub use error::{Error, Result};
