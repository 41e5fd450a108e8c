//! Series solutions `g = -sum_{k>=0} f(A^k x)` and `g = sum_{k>=1} f(A^-k x)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::splitting::{split_hyperbolic, HyperbolicSplitting, DEFAULT_MARGIN};

/// Scalar evaluator shared between threads.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Cap on the number of series terms.
pub const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Contraction,
    Expansion,
}

/// `|f(y)| <= constant * |y|^order` for `|y| <= radius` (Euclidean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub constant: f64,
    pub order: u32,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Number of terms summed.
    pub terms: usize,
    /// Bound (certified) or estimate (heuristic) of the neglected tail.
    pub tail: f64,
}

fn one_sided(a: &DMatrix<f64>, direction: Direction) -> Result<HyperbolicSplitting> {
    let radius = |inv: bool| {
        let m = if inv { a.clone().try_inverse() } else { Some(a.clone()) };
        m.map(|m| m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY)
    };
    let fail = || match direction {
        Direction::Contraction => Error::NotContractive {
            spectral_radius: radius(false),
        },
        Direction::Expansion => Error::NotExpansive {
            spectral_radius: radius(true),
        },
    };
    let split = split_hyperbolic(a, DEFAULT_MARGIN).map_err(|_| fail())?;
    let ok = match direction {
        Direction::Contraction => split.dim_minus() == 0,
        Direction::Expansion => split.dim_plus() == 0,
    };
    if ok {
        Ok(split)
    } else {
        Err(fail())
    }
}

/// Sum the one-sided series at `x`. Stops once two consecutive terms `t`
/// satisfy `|t| q / (1 - q) <= tol`.
pub fn solve_series(a: &DMatrix<f64>, f: &dyn Fn(&[f64]) -> f64, x: &[f64], direction: Direction, tol: f64) -> Result<SeriesValue> {
    let split = one_sided(a, direction)?;
    sum_heuristic(&split, f, x, direction, tol)
}

/// As [`solve_series`] but with a certified tail bound from `growth` and the
/// adapted norm: once `e = |A^k x|_ad <= radius` the terms from `k` on sum
/// to at most `C e^n / (1 - q^n)`.
pub fn solve_series_certified(
    a: &DMatrix<f64>,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    direction: Direction,
    tol: f64,
    growth: &GrowthBound,
) -> Result<SeriesValue> {
    let split = one_sided(a, direction)?;
    sum_certified(&split, f, x, direction, tol, growth)
}

fn step(split: &HyperbolicSplitting, direction: Direction, y: &[f64]) -> Vec<f64> {
    match direction {
        Direction::Contraction => split.apply(y),
        Direction::Expansion => split.apply_inverse(y),
    }
}

fn sign_and_start(direction: Direction) -> (f64, usize) {
    match direction {
        Direction::Contraction => (-1.0, 0),
        Direction::Expansion => (1.0, 1),
    }
}

pub(crate) fn sum_heuristic(
    split: &HyperbolicSplitting,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    direction: Direction,
    tol: f64,
) -> Result<SeriesValue> {
    let q = split.q();
    let ratio = q / (1.0 - q);
    let (sign, start) = sign_and_start(direction);
    let mut y = x.to_vec();
    for _ in 0..start {
        y = step(split, direction, &y);
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..MAX_TERMS {
        let t = f(&y);
        sum += t;
        let tail = t.abs().max(prev) * ratio;
        if tail <= tol {
            return Ok(SeriesValue {
                value: sign * sum,
                terms: k + 1,
                tail,
            });
        }
        prev = t.abs();
        y = step(split, direction, &y);
    }
    Err(Error::SeriesDiverged {
        terms: MAX_TERMS,
        tail: prev * ratio,
    })
}

fn sum_certified(
    split: &HyperbolicSplitting,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    direction: Direction,
    tol: f64,
    growth: &GrowthBound,
) -> Result<SeriesValue> {
    let q = split.q();
    let n = growth.order.max(1) as i32;
    let factor = growth.constant / (1.0 - q.powi(n));
    let (sign, start) = sign_and_start(direction);
    let adapted = |y: &[f64]| match direction {
        Direction::Contraction => split.adapted_norm_plus(y),
        Direction::Expansion => split.adapted_norm_minus(y),
    };
    let mut y = x.to_vec();
    for _ in 0..start {
        y = step(split, direction, &y);
    }
    let mut sum = 0.0;
    let mut tail = f64::INFINITY;
    for k in 0..MAX_TERMS {
        sum += f(&y);
        // remaining terms are f(A^i y') with |A^i y'| <= q^i |y'|_ad
        let e = adapted(&step(split, direction, &y));
        if e <= growth.radius {
            tail = factor * e.powi(n);
            if tail <= tol {
                return Ok(SeriesValue {
                    value: sign * sum,
                    terms: k + 1,
                    tail,
                });
            }
        }
        y = step(split, direction, &y);
    }
    Err(Error::SeriesDiverged { terms: MAX_TERMS, tail })
}
