use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::multiindex::{monomial_count, monomials, MultiIndex};
use super::multilinear::polarize;
use super::{factorial, falling_factorial, MAX_DEGREE, MAX_DIM};
use crate::{Error, Result};

type Coeffs = BTreeMap<MultiIndex, f64>;

/// Degree-`j` homogeneous polynomial map `R^m -> R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HomPolyRepr", into = "HomPolyRepr")]
pub struct HomPolyMap {
    dim: usize,
    codim: usize,
    degree: usize,
    coords: Vec<Coeffs>,
}

/// One monomial term as stored in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoordsRepr {
    PerCoordinate(Vec<Vec<Term>>),
    Scalar(Vec<Term>),
}

#[derive(Serialize, Deserialize)]
struct HomPolyRepr {
    dim: usize,
    #[serde(default = "one")]
    codim: usize,
    degree: usize,
    coords: CoordsRepr,
}

fn one() -> usize {
    1
}

impl TryFrom<HomPolyRepr> for HomPolyMap {
    type Error = Error;

    fn try_from(r: HomPolyRepr) -> Result<Self> {
        let per_coord = match r.coords {
            CoordsRepr::PerCoordinate(c) => c,
            CoordsRepr::Scalar(terms) => vec![terms],
        };
        if per_coord.len() != r.codim {
            return Err(Error::DimensionMismatch {
                expected: r.codim,
                got: per_coord.len(),
            });
        }
        let mut p = HomPolyMap::zero(r.dim, r.codim, r.degree)?;
        for (c, terms) in per_coord.into_iter().enumerate() {
            for t in terms {
                p.add_term(c, &t.exponents, t.coeff)?;
            }
        }
        Ok(p)
    }
}

impl From<HomPolyMap> for HomPolyRepr {
    fn from(p: HomPolyMap) -> Self {
        let coords = p
            .coords
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(k, &v)| Term {
                        exponents: k.0.clone(),
                        coeff: v,
                    })
                    .collect()
            })
            .collect();
        HomPolyRepr {
            dim: p.dim,
            codim: p.codim,
            degree: p.degree,
            coords: CoordsRepr::PerCoordinate(coords),
        }
    }
}

fn check_caps(dim: usize, degree: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::CapExceeded {
            what: "dimension",
            value: dim,
            cap: MAX_DIM,
        });
    }
    if degree > MAX_DEGREE {
        return Err(Error::CapExceeded {
            what: "degree",
            value: degree,
            cap: MAX_DEGREE,
        });
    }
    Ok(())
}

impl HomPolyMap {
    pub fn zero(dim: usize, codim: usize, degree: usize) -> Result<Self> {
        check_caps(dim, degree)?;
        if codim == 0 {
            return Err(Error::InvalidInput("codim must be >= 1".into()));
        }
        Ok(Self::zero_unchecked(dim, codim, degree))
    }

    pub(crate) fn zero_unchecked(dim: usize, codim: usize, degree: usize) -> Self {
        HomPolyMap {
            dim,
            codim,
            degree,
            coords: vec![Coeffs::new(); codim],
        }
    }

    /// Scalar polynomial from `(exponents, coeff)` pairs.
    pub fn scalar(dim: usize, degree: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        let mut p = Self::zero(dim, 1, degree)?;
        for (e, c) in terms {
            p.add_term(0, e, *c)?;
        }
        Ok(p)
    }

    /// Every monomial coefficient uniform in `[-scale, scale]`.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, codim: usize, degree: usize, scale: f64) -> Result<Self> {
        let mut p = Self::zero(dim, codim, degree)?;
        let basis = monomials(dim, degree);
        for c in &mut p.coords {
            for mi in &basis {
                c.insert(mi.clone(), rng.gen_range(-scale..=scale));
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self, coord: usize) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coords[coord].iter().map(|(k, &v)| (k, v))
    }

    pub fn coeff(&self, coord: usize, exponents: &[u32]) -> f64 {
        self.coords
            .get(coord)
            .and_then(|c| c.get(&MultiIndex(exponents.to_vec())))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.values().all(|&v| v == 0.0))
    }

    pub fn add_term(&mut self, coord: usize, exponents: &[u32], coeff: f64) -> Result<()> {
        if coord >= self.codim {
            return Err(Error::DimensionMismatch {
                expected: self.codim,
                got: coord + 1,
            });
        }
        if exponents.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: exponents.len(),
            });
        }
        let mi = MultiIndex(exponents.to_vec());
        if mi.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                exponents: exponents.to_vec(),
                expected: self.degree,
                got: mi.degree(),
            });
        }
        if !coeff.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite coefficient {coeff}")));
        }
        *self.coords[coord].entry(mi).or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| c.iter().map(|(mi, &v)| v * mi.eval(x)).sum())
            .collect()
    }

    /// Scalar value of a `codim = 1` polynomial.
    pub fn eval_scalar(&self, x: &[f64]) -> f64 {
        self.coords[0].iter().map(|(mi, &v)| v * mi.eval(x)).sum()
    }

    pub fn scaled(&self, factor: f64) -> HomPolyMap {
        let mut out = self.clone();
        for c in &mut out.coords {
            for v in c.values_mut() {
                *v *= factor;
            }
        }
        out
    }

    /// Coefficients in graded-lex order, coordinate blocks concatenated.
    pub fn coeff_vector(&self) -> Vec<f64> {
        let basis = monomials(self.dim, self.degree);
        self.coords
            .iter()
            .flat_map(|c| basis.iter().map(move |mi| c.get(mi).copied().unwrap_or(0.0)))
            .collect()
    }

    pub fn from_coeff_vector(dim: usize, codim: usize, degree: usize, v: &[f64]) -> Result<Self> {
        let basis = monomials(dim, degree);
        if v.len() != basis.len() * codim {
            return Err(Error::DimensionMismatch {
                expected: basis.len() * codim,
                got: v.len(),
            });
        }
        let mut p = Self::zero(dim, codim, degree)?;
        for (c, chunk) in v.chunks(basis.len()).enumerate() {
            for (mi, &val) in basis.iter().zip(chunk) {
                if val != 0.0 {
                    p.coords[c].insert(mi.clone(), val);
                }
            }
        }
        Ok(p)
    }

    /// Max over coordinates of the coefficient l1 norm.
    pub fn coeff_l1(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| c.values().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn hompoly_eval(p: &HomPolyMap, x: &[f64]) -> Result<Vec<f64>> {
    p.eval(x)
}

/// `P^(n)(z)(x)^n = j (j-1) ... (j-n+1) g(z, ..., z, x, ..., x)` with `g` the
/// symmetric form of `P`; zero for `n > j`.
pub fn hompoly_derivative(p: &HomPolyMap, z: &[f64], x: &[f64], n: usize) -> Result<Vec<f64>> {
    for v in [z, x] {
        if v.len() != p.dim {
            return Err(Error::DimensionMismatch {
                expected: p.dim,
                got: v.len(),
            });
        }
    }
    let j = p.degree;
    if n > j {
        return Ok(vec![0.0; p.codim]);
    }
    let g = polarize(p);
    let mut args: Vec<&[f64]> = Vec::with_capacity(j);
    args.extend(std::iter::repeat_n(z, j - n));
    args.extend(std::iter::repeat_n(x, n));
    let factor = falling_factorial(j, n);
    Ok(g.eval_unchecked(&args).into_iter().map(|v| v * factor).collect())
}

/// Sparse polynomial in any number of variables, used for substitutions.
type Sparse = BTreeMap<Vec<u32>, f64>;

fn sparse_mul(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (ea, &ca) in a {
        for (eb, &cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// `Q(y) = P(B y)` for an `m x k` matrix `B`; `Q` is degree-`j` in `k` variables.
pub fn compose_general(p: &HomPolyMap, b: &DMatrix<f64>) -> Result<HomPolyMap> {
    if b.nrows() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            got: b.nrows(),
        });
    }
    let k = b.ncols();
    let mut unit = vec![0u32; k];
    let one: Sparse = [(unit.clone(), 1.0)].into_iter().collect();
    // powers[i][e] = (row_i . y)^e
    let powers: Vec<Vec<Sparse>> = (0..p.dim)
        .map(|i| {
            let mut lin = Sparse::new();
            for l in 0..k {
                if b[(i, l)] != 0.0 {
                    unit[l] = 1;
                    lin.insert(unit.clone(), b[(i, l)]);
                    unit[l] = 0;
                }
            }
            let mut pw = vec![one.clone()];
            for e in 1..=p.degree {
                let next = sparse_mul(&pw[e - 1], &lin);
                pw.push(next);
            }
            pw
        })
        .collect();

    let mut out = HomPolyMap::zero_unchecked(k, p.codim, p.degree);
    for (c, coeffs) in p.coords.iter().enumerate() {
        let mut acc = Sparse::new();
        for (mi, &v) in coeffs {
            if v == 0.0 {
                continue;
            }
            let mut term: Sparse = [(vec![0u32; k], v)].into_iter().collect();
            for (i, &e) in mi.0.iter().enumerate() {
                if e > 0 {
                    term = sparse_mul(&term, &powers[i][e as usize]);
                }
            }
            for (e, w) in term {
                *acc.entry(e).or_insert(0.0) += w;
            }
        }
        out.coords[c] = acc
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(e, w)| (MultiIndex(e), w))
            .collect();
    }
    Ok(out)
}

/// `Q(x) = P(A x)` for square `A`.
pub fn compose_linear(p: &HomPolyMap, a: &DMatrix<f64>) -> Result<HomPolyMap> {
    if !a.is_square() || a.nrows() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            got: if a.is_square() { a.nrows() } else { a.ncols() },
        });
    }
    compose_general(p, a)
}

/// Matrix of `Q -> Q o A` on degree-`n`, `d`-valued polynomials in the
/// graded-lex monomial basis (block diagonal over the `d` coordinates).
pub fn ln_matrix(a: &DMatrix<f64>, n: usize, d: usize) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let m = a.nrows();
    check_caps(m, n)?;
    let basis = monomials(m, n);
    let size = basis.len();
    debug_assert_eq!(size, monomial_count(m, n));
    let mut block = DMatrix::zeros(size, size);
    for (col, mi) in basis.iter().enumerate() {
        let mut e = HomPolyMap::zero_unchecked(m, 1, n);
        e.coords[0].insert(mi.clone(), 1.0);
        let image = compose_general(&e, a)?.coeff_vector();
        block.column_mut(col).copy_from_slice(&image);
    }
    let mut out = DMatrix::zeros(size * d, size * d);
    for c in 0..d {
        out.view_mut((c * size, c * size), (size, size)).copy_from(&block);
    }
    Ok(out)
}

/// `sup_{|x|_inf <= 1} |P(x)|_inf <= continuity_bound(P)`, so that
/// `|P(x)| <= c |x|^j` in the sup norm (and in any norm dominating it).
pub fn continuity_bound(p: &HomPolyMap) -> f64 {
    p.coeff_l1()
}

/// The joint polynomial `(z, x) -> P^(n)(z)(x)^n` on `R^(2m)`, homogeneous of
/// degree `j` (zero when `n > j`).
pub fn derivative_polynomial(p: &HomPolyMap, n: usize) -> HomPolyMap {
    let m = p.dim;
    if n > p.degree {
        return HomPolyMap::zero_unchecked(2 * m, p.codim, p.degree);
    }
    let mut b = DMatrix::zeros(m, 2 * m);
    for i in 0..m {
        b[(i, i)] = 1.0;
        b[(i, m + i)] = 1.0;
    }
    let full = compose_general(p, &b).expect("shape checked");
    // P(z + x) = sum_n P^(n)(z)(x)^n / n!; keep the terms of x-degree n.
    let nf = factorial(n);
    let mut out = HomPolyMap::zero_unchecked(2 * m, p.codim, p.degree);
    for (c, coeffs) in full.coords.into_iter().enumerate() {
        out.coords[c] = coeffs
            .into_iter()
            .filter(|(mi, _)| mi.0[m..].iter().sum::<u32>() as usize == n)
            .map(|(mi, v)| (mi, v * nf))
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn x1sq_x2() -> HomPolyMap {
        HomPolyMap::scalar(2, 3, &[(&[2, 1], 1.0)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = x1sq_x2();
        assert_eq!(p.eval(&[1.0, 1.0]).unwrap(), vec![1.0]);
        assert_eq!(p.eval(&[2.0, 3.0]).unwrap(), vec![12.0]);
        assert_eq!(p.eval(&[0.0, 0.0]).unwrap(), vec![0.0]);
        assert!(matches!(p.eval(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn construction_errors() {
        assert!(HomPolyMap::zero(7, 1, 2).is_err());
        assert!(HomPolyMap::zero(2, 1, 7).is_err());
        let mut p = HomPolyMap::zero(2, 1, 2).unwrap();
        assert!(matches!(p.add_term(0, &[1, 0], 1.0), Err(Error::DegreeMismatch { .. })));
        assert!(p.add_term(1, &[1, 1], 1.0).is_err());
    }

    #[test]
    fn homogeneity() {
        let mut r = rng::seeded(1);
        for j in 0..=4 {
            let p = HomPolyMap::random(&mut r, 3, 2, j, 1.0).unwrap();
            let x = rng::uniform_vec(&mut r, 3, 1.0);
            let lam = 1.7;
            let px = p.eval(&x).unwrap();
            let plx = p.eval(&x.iter().map(|v| v * lam).collect::<Vec<_>>()).unwrap();
            for (a, b) in px.iter().zip(&plx) {
                assert!((b - lam.powi(j as i32) * a).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn derivative_special_cases() {
        let p = x1sq_x2();
        let z = [1.0, 0.0];
        let x = [0.0, 1.0];
        assert_eq!(hompoly_derivative(&p, &z, &x, 4).unwrap(), vec![0.0]);
        assert!((hompoly_derivative(&p, &z, &x, 1).unwrap()[0] - 1.0).abs() < 1e-14);
        let x = [0.7, -0.4];
        let full = hompoly_derivative(&p, &z, &x, 3).unwrap()[0];
        assert!((full - 6.0 * p.eval_scalar(&x)).abs() < 1e-13);
        let other = hompoly_derivative(&p, &[5.0, -3.0], &x, 3).unwrap()[0];
        assert_eq!(full, other);
    }

    #[test]
    fn derivative_polynomial_matches_formula() {
        let mut r = rng::seeded(2);
        let p = HomPolyMap::random(&mut r, 2, 1, 4, 1.0).unwrap();
        for n in 0..=5 {
            let dp = derivative_polynomial(&p, n);
            let z = rng::uniform_vec(&mut r, 2, 1.0);
            let x = rng::uniform_vec(&mut r, 2, 1.0);
            let zx: Vec<f64> = z.iter().chain(&x).copied().collect();
            let a = dp.eval_scalar(&zx);
            let b = hompoly_derivative(&p, &z, &x, n).unwrap()[0];
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn compose_examples() {
        let p = HomPolyMap::scalar(2, 2, &[(&[2, 0], 1.0)]).unwrap();
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(compose_linear(&p, &id).unwrap(), p);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let q = compose_linear(&p, &a).unwrap();
        assert_eq!(q, HomPolyMap::scalar(2, 2, &[(&[2, 0], 4.0)]).unwrap());
        let p = HomPolyMap::scalar(2, 2, &[(&[1, 1], 1.0)]).unwrap();
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(compose_linear(&p, &swap).unwrap(), p);
        assert!(compose_linear(&p, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn ln_matrix_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        let l = ln_matrix(&id, 2, 2).unwrap();
        assert_eq!(l, DMatrix::identity(12, 12));
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 3.0]);
        let l = ln_matrix(&a, 2, 1).unwrap();
        assert_eq!(l, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.25, 1.5, 9.0])));
    }

    #[test]
    fn continuity_bound_examples() {
        assert_eq!(continuity_bound(&HomPolyMap::zero(2, 1, 3).unwrap()), 0.0);
        let p = HomPolyMap::scalar(2, 2, &[(&[2, 0], 1.0)]).unwrap();
        assert!(continuity_bound(&p) >= 1.0);
        let q = HomPolyMap::scalar(2, 2, &[(&[1, 1], 1.0)]).unwrap();
        let cb = continuity_bound(&q);
        let mut r = rng::seeded(9);
        let mut best: f64 = 0.0;
        for _ in 0..2000 {
            let x = rng::unit_vec(&mut r, 2);
            let v = q.eval_scalar(&x).abs();
            best = best.max(v);
            assert!(v <= cb);
        }
        assert!(best > 0.49 && best <= 0.5 + 1e-12 && cb >= best);
    }

    #[test]
    fn json_schema() {
        let p = x1sq_x2();
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["coords"][0][0]["exponents"], serde_json::json!([2, 1]));
        let back: HomPolyMap = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
        let flat: HomPolyMap =
            serde_json::from_str(r#"{"dim":2,"degree":2,"coords":[{"exponents":[1,1],"coeff":2.5}]}"#).unwrap();
        assert_eq!(flat.coeff(0, &[1, 1]), 2.5);
        assert!(serde_json::from_str::<HomPolyMap>(r#"{"dim":2,"degree":2,"coords":[{"exponents":[1,0],"coeff":1}]}"#).is_err());
    }
}
