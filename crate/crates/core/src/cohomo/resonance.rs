//! Resonance relations `lambda^p = 1` among eigenvalues.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::polyalg::{monomials, MultiIndex};

/// Default threshold for `|lambda^p - 1|`.
pub const RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resonance {
    pub multi_index: MultiIndex,
    pub residual: f64,
}

/// Eigenvalues of a square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    a.complex_eigenvalues().iter().copied().collect()
}

/// `|lambda^p - 1|` for the multi-index `p`.
pub fn resonance_residual(eigenvalues: &[Complex<f64>], p: &[u32]) -> f64 {
    let prod = eigenvalues
        .iter()
        .zip(p)
        .fold(Complex::new(1.0, 0.0), |acc, (l, &e)| acc * l.powu(e));
    (prod - Complex::new(1.0, 0.0)).norm()
}

/// Every `p` with `1 <= |p| <= n_max` and `|lambda^p - 1| <= tol`, by degree
/// and then graded-lex order.
pub fn check_resonances(eigenvalues: &[Complex<f64>], n_max: usize, tol: f64) -> Vec<Resonance> {
    let m = eigenvalues.len();
    let mut hits = Vec::new();
    if m == 0 {
        return hits;
    }
    for n in 1..=n_max {
        for p in monomials(m, n) {
            let residual = resonance_residual(eigenvalues, p.exponents());
            if residual <= tol {
                hits.push(Resonance {
                    multi_index: p,
                    residual,
                });
            }
        }
    }
    hits
}

/// Degree-`n` multi-indices closest to resonance: all whose residual is
/// within `slack` of the minimum.
pub fn nearest_resonances(eigenvalues: &[Complex<f64>], n: usize, slack: f64) -> Vec<Resonance> {
    let all: Vec<Resonance> = monomials(eigenvalues.len(), n)
        .into_iter()
        .map(|p| {
            let residual = resonance_residual(eigenvalues, p.exponents());
            Resonance {
                multi_index: p,
                residual,
            }
        })
        .collect();
    let best = all.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    all.into_iter().filter(|r| r.residual <= best + slack).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn saddle_hits() {
        let hits = check_resonances(&reals(&[2.0, 0.5]), 4, RESONANCE_TOL);
        let ps: Vec<Vec<u32>> = hits.iter().map(|h| h.multi_index.0.clone()).collect();
        assert_eq!(ps, vec![vec![1, 1], vec![2, 2]]);
        assert!(hits.iter().all(|h| h.residual == 0.0));
    }

    #[test]
    fn no_hits() {
        assert!(check_resonances(&reals(&[0.5, 1.0 / 3.0]), 6, RESONANCE_TOL).is_empty());
        assert!(check_resonances(&reals(&[0.5]), 1, RESONANCE_TOL).is_empty());
    }

    #[test]
    fn complex_pair() {
        // lambda = i: lambda^4 = 1 and lambda * conj(lambda) = 1
        let ev = vec![Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)];
        let hits = check_resonances(&ev, 4, 1e-12);
        let ps: Vec<Vec<u32>> = hits.iter().map(|h| h.multi_index.0.clone()).collect();
        assert!(ps.contains(&vec![1, 1]) && ps.contains(&vec![4, 0]) && ps.contains(&vec![0, 4]));
    }

    #[test]
    fn nearest() {
        let near = nearest_resonances(&reals(&[2.0, 0.5]), 2, 1e-12);
        assert_eq!(near.len(), 1);
        assert_eq!(near[0].multi_index.0, vec![1, 1]);
    }
}
