//! Degree-by-degree formal solution of `Q_n(Ax) - Q_n(x) = P_n(x)`.

use nalgebra::{DMatrix, DVector};

use crate::polyalg::{compose_linear, ln_matrix, HomPolyMap};
use crate::rng;
use crate::{Error, Result};

use super::resonance::{eigenvalues, nearest_resonances};
use super::splitting::HyperbolicSplitting;

const ROUND_TRIP_SAMPLES: usize = 16;

/// Solve `(L_n - I) q = p` for the coefficient vector of `Q_n`, where
/// `L_n Q = Q o A`.
///
/// Singular directions of `L_n - I` (singular value at most
/// `tol (1 + |p|)`) are resonant; the equation is still solved when `p` has
/// no component along them, otherwise `SingularResonance` is returned.
pub fn solve_formal(a: &DMatrix<f64>, p: &HomPolyMap, tol: f64) -> Result<HomPolyMap> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidInput("formal solver needs degree >= 1".into()));
    }
    if a.nrows() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: a.nrows(),
        });
    }
    let l = ln_matrix(a, n, p.codim())?;
    let size = l.nrows();
    let system = l - DMatrix::identity(size, size);
    let rhs = DVector::from_vec(p.coeff_vector());
    let p_norm = rhs.norm();
    let threshold = tol * (1.0 + p_norm);
    let svd = system.clone().svd(true, true);
    let sigma_min = svd.singular_values.min();
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    // minimum-norm solution; near-null directions must carry no right-hand side
    let mut sol = DVector::zeros(size);
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        let coef = u.column(i).dot(&rhs);
        if sigma <= threshold {
            if coef.abs() > threshold {
                let near = nearest_resonances(&eigenvalues(a), n, tol.sqrt());
                return Err(Error::SingularResonance {
                    degree: n,
                    sigma_min,
                    multi_indices: near.into_iter().map(|r| r.multi_index.0).collect(),
                });
            }
            continue;
        }
        sol += v_t.row(i).transpose() * (coef / sigma);
    }
    let residual = (&system * &sol - &rhs).norm();
    if residual > threshold {
        return Err(Error::Singular { sigma_min });
    }
    let q = HomPolyMap::from_coeff_vector(p.dim(), p.codim(), n, sol.as_slice())?;

    let qa = compose_linear(&q, a)?;
    let mut r = rng::seeded(0x5eed ^ n as u64);
    let scale = 1.0 + p.coeff_l1() + q.coeff_l1() * (1.0 + a.amax()).powi(n as i32);
    for _ in 0..ROUND_TRIP_SAMPLES {
        let x = rng::uniform_vec(&mut r, p.dim(), 1.0);
        let lhs = qa.eval_unchecked(&x);
        let qx = q.eval_unchecked(&x);
        let px = p.eval_unchecked(&x);
        for c in 0..p.codim() {
            let err = (lhs[c] - qx[c] - px[c]).abs();
            if err > tol * scale {
                return Err(Error::Singular { sigma_min });
            }
        }
    }
    Ok(q)
}

/// Solve every degree of a Taylor-term list `P_n` (stored as
/// `f^(n)(0)(x)^n`) and return the `Q_n` in the same convention.
pub fn solve_formal_all(split: &HyperbolicSplitting, terms: &[HomPolyMap], tol: f64) -> Result<Vec<HomPolyMap>> {
    terms.iter().map(|p| solve_formal(split.matrix(), p, tol)).collect()
}

/// `g(x) = sum_n Q_n(x) / n!` for scalar-valued `Q_n`.
pub fn eval_taylor(terms: &[HomPolyMap], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|q| {
            let nf: f64 = (1..=q.degree()).map(|k| k as f64).product();
            q.eval_unchecked(x)[0] / nf
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn scalar_closed_form() {
        let p = HomPolyMap::scalar(1, 2, &[(&[2], 1.0)]).unwrap();
        let q = solve_formal(&diag(&[0.5]), &p, 1e-12).unwrap();
        assert!((q.coeff(0, &[2]) + 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_coefficients() {
        let p = HomPolyMap::scalar(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)]).unwrap();
        let q = solve_formal(&diag(&[0.5, 2.0]), &p, 1e-12).unwrap();
        assert!((q.coeff(0, &[2, 0]) + 4.0 / 3.0).abs() < 1e-14);
        assert!((q.coeff(0, &[0, 2]) - 1.0 / 3.0).abs() < 1e-14);
        assert!(q.coeff(0, &[1, 1]).abs() < 1e-14);
    }

    #[test]
    fn resonant_product() {
        let p = HomPolyMap::scalar(2, 2, &[(&[1, 1], 1.0)]).unwrap();
        match solve_formal(&diag(&[2.0, 0.5]), &p, 1e-9) {
            Err(Error::SingularResonance { degree, multi_indices, .. }) => {
                assert_eq!(degree, 2);
                assert_eq!(multi_indices, vec![vec![1, 1]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_diagonal_round_trip() {
        let a = DMatrix::from_row_slice(2, 2, &[0.4, 0.3, -0.2, 1.9]);
        let mut r = rng::seeded(3);
        for n in 1..=4 {
            let p = HomPolyMap::random(&mut r, 2, 1, n, 1.0).unwrap();
            let q = solve_formal(&a, &p, 1e-10).unwrap();
            let x = [0.3, -0.8];
            let ax = [0.4 * 0.3 + 0.3 * -0.8, -0.2 * 0.3 + 1.9 * -0.8];
            let lhs = q.eval_scalar(&ax) - q.eval_scalar(&x);
            assert!((lhs - p.eval_scalar(&x)).abs() < 1e-12);
        }
    }
}
