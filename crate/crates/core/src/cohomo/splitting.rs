//! Hyperbolic splitting `R^m = X_+ (+) X_-` from an ordered real Schur form.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use serde::Serialize;

use crate::{Error, Result};

/// Default distance of the spectrum from the unit circle.
pub const DEFAULT_MARGIN: f64 = 1e-3;
const THETA: f64 = 0.01;
const HORIZON_CAP: usize = 10_000;

/// Invariant splitting of a hyperbolic matrix together with an adapted norm.
///
/// `X_+` carries the eigenvalues inside the unit circle and `X_-` those
/// outside. On each side the adapted norm is
/// `|x|_+ = max_{0<=k<=K_+} rho_+^-k |A^k x|` and
/// `|x|_- = max_{0<=k<=K_-} rho_-^-k |A^-k x|`, which gives
/// `|A x_+|_+ <= q |x_+|_+` and `|A^-1 x_-|_- <= q |x_-|_-`.
#[derive(Debug, Clone)]
pub struct HyperbolicSplitting {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    eigenvalues: Vec<Complex<f64>>,
    basis_plus: DMatrix<f64>,
    basis_minus: DMatrix<f64>,
    projector_plus: DMatrix<f64>,
    projector_minus: DMatrix<f64>,
    rho_plus: f64,
    rho_minus: f64,
    horizon_plus: usize,
    horizon_minus: usize,
    restricted_plus: DMatrix<f64>,
    restricted_minus: DMatrix<f64>,
    margin: f64,
}

/// Largest observed defects of the splitting invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingDefects {
    pub sum_identity: f64,
    pub idempotent: f64,
    pub cross: f64,
    pub commute: f64,
    /// `max |A x_+|_+ / |x_+|_+ - q` over samples (non-positive when certified).
    pub contraction_plus: f64,
    /// `max |A^-1 x_-|_- / |x_-|_- - q` over samples.
    pub contraction_minus: f64,
}

impl SplittingDefects {
    pub fn within(&self, tol: f64) -> bool {
        self.sum_identity <= tol
            && self.idempotent <= tol
            && self.cross <= tol
            && self.commute <= tol
            && self.contraction_plus <= tol
            && self.contraction_minus <= tol
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Solve `T11 X - X T22 = C` through the Kronecker form.
pub(crate) fn solve_sylvester(t11: &DMatrix<f64>, t22: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = t11.nrows();
    let r = t22.nrows();
    if p == 0 || r == 0 {
        return Ok(DMatrix::zeros(p, r));
    }
    let n = p * r;
    let mut k = DMatrix::zeros(n, n);
    // vec(T11 X) = (I (x) T11) vec X ; vec(X T22) = (T22^T (x) I) vec X
    for j in 0..r {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += t11[(i, l)];
            }
            for l in 0..r {
                k[(row, l * p + i)] -= t22[(l, j)];
            }
        }
    }
    let rhs = DVector::from_column_slice(c.as_slice());
    let sigma_min = k.singular_values().min();
    let sol = k.lu().solve(&rhs).ok_or(Error::Singular { sigma_min })?;
    Ok(DMatrix::from_column_slice(p, r, sol.as_slice()))
}

struct Ordered {
    q: DMatrix<f64>,
    t: DMatrix<f64>,
    sizes: Vec<usize>,
}

fn block_start(sizes: &[usize], idx: usize) -> usize {
    sizes[..idx].iter().sum()
}

fn block_eigenvalues(t: &DMatrix<f64>, start: usize, size: usize) -> Vec<Complex<f64>> {
    if size == 1 {
        return vec![Complex::new(t[(start, start)], 0.0)];
    }
    let (a, b, c, d) = (
        t[(start, start)],
        t[(start, start + 1)],
        t[(start + 1, start)],
        t[(start + 1, start + 1)],
    );
    let mean = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        vec![Complex::new(mean + s, 0.0), Complex::new(mean - s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        vec![Complex::new(mean, s), Complex::new(mean, -s)]
    }
}

fn rotate(t: &mut DMatrix<f64>, q: &mut DMatrix<f64>, start: usize, g: &DMatrix<f64>) {
    let w = g.nrows();
    let n = t.nrows();
    let rows = g.transpose() * t.view((start, 0), (w, n));
    t.view_mut((start, 0), (w, n)).copy_from(&rows);
    let cols = t.view((0, start), (n, w)) * g;
    t.view_mut((0, start), (n, w)).copy_from(&cols);
    let qc = q.view((0, start), (n, w)) * g;
    q.view_mut((0, start), (n, w)).copy_from(&qc);
}

/// Real Schur form with the blocks recorded and 2x2 blocks carrying real
/// eigenvalues split into two 1x1 blocks.
fn schur_blocks(a: &DMatrix<f64>) -> Ordered {
    let n = a.nrows();
    let (mut q, mut t) = Schur::new(a.clone()).unpack();
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n {
            let sub = t[(i + 1, i)].abs();
            let scale = t[(i, i)].abs() + t[(i + 1, i + 1)].abs();
            if sub > 1e-14 * scale.max(f64::MIN_POSITIVE) {
                let ev = block_eigenvalues(&t, i, 2);
                if ev[0].im == 0.0 {
                    let lam = ev[0].re;
                    let (a11, a12, a21, a22) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
                    let v1 = [a12, lam - a11];
                    let v2 = [lam - a22, a21];
                    let v = if v1[0].hypot(v1[1]) >= v2[0].hypot(v2[1]) { v1 } else { v2 };
                    let nv = v[0].hypot(v[1]);
                    let (c, s) = (v[0] / nv, v[1] / nv);
                    let g = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
                    rotate(&mut t, &mut q, i, &g);
                    t[(i + 1, i)] = 0.0;
                    sizes.push(1);
                    i += 1;
                    continue;
                }
                sizes.push(2);
                i += 2;
                continue;
            }
            t[(i + 1, i)] = 0.0;
        }
        sizes.push(1);
        i += 1;
    }
    for c in 0..n {
        for r in c + 2..n {
            t[(r, c)] = 0.0;
        }
    }
    Ordered { q, t, sizes }
}

/// Swap the adjacent blocks `idx` and `idx + 1` by an orthogonal similarity.
fn swap_blocks(o: &mut Ordered, idx: usize) -> Result<()> {
    let start = block_start(&o.sizes, idx);
    let p = o.sizes[idx];
    let r = o.sizes[idx + 1];
    let w = p + r;
    let a11 = o.t.view((start, start), (p, p)).into_owned();
    let a12 = o.t.view((start, start + p), (p, r)).into_owned();
    let a22 = o.t.view((start + p, start + p), (r, r)).into_owned();
    let x = solve_sylvester(&a11, &a22, &a12)?;
    let mut m = DMatrix::zeros(w, w);
    m.view_mut((0, 0), (p, r)).copy_from(&(-x));
    m.view_mut((p, 0), (r, r)).fill_with_identity();
    m.view_mut((0, r), (p, p)).fill_with_identity();
    let g = m.qr().q();
    rotate(&mut o.t, &mut o.q, start, &g);
    for c in start..start + r {
        for rr in start + r..start + w {
            o.t[(rr, c)] = 0.0;
        }
    }
    o.sizes.swap(idx, idx + 1);
    Ok(())
}

fn block_modulus(t: &DMatrix<f64>, start: usize, size: usize) -> f64 {
    block_eigenvalues(t, start, size)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Choose `rho` and the horizon `K` for a matrix with spectral radius `r < 1`.
fn adapted_horizon(m: &DMatrix<f64>, r: f64) -> (f64, usize) {
    let mut theta = THETA;
    loop {
        let rho = r + theta * (1.0 - r);
        let mut power = m.clone();
        for k in 1..=HORIZON_CAP {
            if spectral_norm(&power) < rho.powi(k as i32) {
                return (rho, k);
            }
            power = &power * m;
        }
        theta = (2.0 * theta).min(0.5 * (1.0 + theta));
    }
}

/// Split a hyperbolic matrix into its contracting and expanding parts.
pub fn split_hyperbolic(a: &DMatrix<f64>, margin: f64) -> Result<HyperbolicSplitting> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let sv = a.singular_values();
    let sigma_min = sv.min();
    if !(sigma_min > 1e-12 * sv.max().max(1.0)) {
        return Err(Error::Singular { sigma_min });
    }
    let a_inv = a.clone().try_inverse().ok_or(Error::Singular { sigma_min })?;

    let mut o = schur_blocks(a);
    let mut eigenvalues = Vec::with_capacity(n);
    for (idx, &s) in o.sizes.iter().enumerate() {
        eigenvalues.extend(block_eigenvalues(&o.t, block_start(&o.sizes, idx), s));
    }
    for z in &eigenvalues {
        let modulus = z.norm();
        if (modulus - 1.0).abs() <= margin {
            return Err(Error::NotHyperbolic { modulus, margin });
        }
    }

    // bubble the stable blocks to the front
    let stable = |o: &Ordered, idx: usize| block_modulus(&o.t, block_start(&o.sizes, idx), o.sizes[idx]) < 1.0;
    loop {
        let mut swapped = false;
        for idx in 0..o.sizes.len().saturating_sub(1) {
            if !stable(&o, idx) && stable(&o, idx + 1) {
                swap_blocks(&mut o, idx)?;
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let k: usize = (0..o.sizes.len())
        .filter(|&idx| stable(&o, idx))
        .map(|idx| o.sizes[idx])
        .sum();

    let q1 = o.q.columns(0, k).into_owned();
    let q2 = o.q.columns(k, n - k).into_owned();
    let t11 = o.t.view((0, 0), (k, k)).into_owned();
    let t12 = o.t.view((0, k), (k, n - k)).into_owned();
    let t22 = o.t.view((k, k), (n - k, n - k)).into_owned();
    let y = solve_sylvester(&t11, &t22, &(-&t12))?;

    let mut p_schur = DMatrix::zeros(n, n);
    p_schur.view_mut((0, 0), (k, k)).fill_with_identity();
    p_schur.view_mut((0, k), (k, n - k)).copy_from(&(-&y));
    let projector_plus = &o.q * p_schur * o.q.transpose();
    let projector_minus = DMatrix::identity(n, n) - &projector_plus;

    let raw_minus = &q1 * &y + &q2;
    let basis_minus = if n - k > 0 { raw_minus.qr().q() } else { DMatrix::zeros(n, 0) };
    let basis_plus = q1;

    let restricted_plus = t11.clone();
    let restricted_minus = basis_minus.transpose() * &a_inv * &basis_minus;
    let (rho_plus, horizon_plus) = if k > 0 {
        let r = eigenvalues.iter().map(|z| z.norm()).filter(|&m| m < 1.0).fold(0.0, f64::max);
        adapted_horizon(&restricted_plus, r)
    } else {
        (0.0, 0)
    };
    let (rho_minus, horizon_minus) = if n - k > 0 {
        let r = eigenvalues
            .iter()
            .map(|z| z.norm())
            .filter(|&m| m > 1.0)
            .map(|m| 1.0 / m)
            .fold(0.0, f64::max);
        adapted_horizon(&restricted_minus, r)
    } else {
        (0.0, 0)
    };

    Ok(HyperbolicSplitting {
        a: a.clone(),
        a_inv,
        eigenvalues,
        basis_plus,
        basis_minus,
        projector_plus,
        projector_minus,
        rho_plus,
        rho_minus,
        horizon_plus,
        horizon_minus,
        restricted_plus,
        restricted_minus,
        margin,
    })
}

// NaN stays visible as an infinite defect
fn clamp_defect(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v.max(0.0)
    }
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

// iterate in subspace coordinates so roundoff cannot leak into the other side
fn adapted(basis: &DMatrix<f64>, m: &DMatrix<f64>, y: &[f64], rho: f64, horizon: usize) -> f64 {
    let mut c = basis.transpose() * DVector::from_column_slice(y);
    let mut best = c.norm();
    for k in 1..=horizon {
        c = m * c;
        best = best.max(c.norm() / rho.powi(k as i32));
    }
    best
}

impl HyperbolicSplitting {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_plus(&self) -> usize {
        self.basis_plus.ncols()
    }

    pub fn dim_minus(&self) -> usize {
        self.basis_minus.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    pub fn basis_plus(&self) -> &DMatrix<f64> {
        &self.basis_plus
    }

    pub fn basis_minus(&self) -> &DMatrix<f64> {
        &self.basis_minus
    }

    pub fn projector_plus(&self) -> &DMatrix<f64> {
        &self.projector_plus
    }

    pub fn projector_minus(&self) -> &DMatrix<f64> {
        &self.projector_minus
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Contraction factor of the adapted norm.
    pub fn q(&self) -> f64 {
        self.rho_plus.max(self.rho_minus)
    }

    pub fn horizon(&self) -> usize {
        self.horizon_plus.max(self.horizon_minus)
    }

    pub fn horizons(&self) -> (usize, usize) {
        (self.horizon_plus, self.horizon_minus)
    }

    /// Spectral radius of `A` on `X_+` and of `A^-1` on `X_-`.
    pub fn spectral_radii(&self) -> (f64, f64) {
        let mut plus: f64 = 0.0;
        let mut minus: f64 = 0.0;
        for z in &self.eigenvalues {
            let m = z.norm();
            if m < 1.0 {
                plus = plus.max(m);
            } else {
                minus = minus.max(1.0 / m);
            }
        }
        (plus, minus)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.a, x)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.a_inv, x)
    }

    pub fn project_plus(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.projector_plus, x)
    }

    pub fn project_minus(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.projector_minus, x)
    }

    /// `max(|pi_+ x|, |pi_- x|)` in the Euclidean norm.
    pub fn split_norm(&self, x: &[f64]) -> f64 {
        norm2(&self.project_plus(x)).max(norm2(&self.project_minus(x)))
    }

    /// Largest Euclidean operator norm of the two projectors.
    pub fn projector_norm(&self) -> f64 {
        spectral_norm(&self.projector_plus).max(spectral_norm(&self.projector_minus))
    }

    /// Adapted norm of `pi_+ x`.
    pub fn adapted_norm_plus(&self, x: &[f64]) -> f64 {
        if self.dim_plus() == 0 {
            return 0.0;
        }
        adapted(&self.basis_plus, &self.restricted_plus, &self.project_plus(x), self.rho_plus, self.horizon_plus)
    }

    /// Adapted norm of `pi_- x`.
    pub fn adapted_norm_minus(&self, x: &[f64]) -> f64 {
        if self.dim_minus() == 0 {
            return 0.0;
        }
        adapted(&self.basis_minus, &self.restricted_minus, &self.project_minus(x), self.rho_minus, self.horizon_minus)
    }

    /// Measure the splitting invariants, the contraction inequalities on
    /// the given sample vectors.
    pub fn defects(&self, samples: &[Vec<f64>]) -> SplittingDefects {
        let n = self.dim();
        let p = &self.projector_plus;
        let m = &self.projector_minus;
        let id = DMatrix::<f64>::identity(n, n);
        let amax = |x: DMatrix<f64>| x.amax();
        let q = self.q();
        let mut contraction_plus = f64::NEG_INFINITY;
        let mut contraction_minus = f64::NEG_INFINITY;
        for x in samples {
            let xp = self.project_plus(x);
            let np = self.adapted_norm_plus(&xp);
            if np > 0.0 {
                let ratio = self.adapted_norm_plus(&self.apply(&xp)) / np;
                contraction_plus = contraction_plus.max(ratio - q);
            }
            let xm = self.project_minus(x);
            let nm = self.adapted_norm_minus(&xm);
            if nm > 0.0 {
                let ratio = self.adapted_norm_minus(&self.apply_inverse(&xm)) / nm;
                contraction_minus = contraction_minus.max(ratio - q);
            }
        }
        SplittingDefects {
            sum_identity: amax(p + m - &id),
            idempotent: amax(p * p - p).max(amax(m * m - m)),
            cross: amax(p * m).max(amax(m * p)),
            commute: amax(&self.a * p - p * &self.a).max(amax(&self.a * m - m * &self.a)),
            contraction_plus: clamp_defect(contraction_plus),
            contraction_minus: clamp_defect(contraction_minus),
        }
    }
}
