//! Sampled `C[0,1]`, blid maps, and the spaces they act on.
//!
//! Two concrete spaces are modelled: `R^m` with the Euclidean norm
//! (`Vec<f64>`) and continuous functions on `[0,1]` sampled on a uniform grid
//! with the sup norm ([`GridFunction`]). A [`Blid`] is a globally defined map
//! that is the identity on a ball of radius `identity_radius()` and whose image
//! lies in the closed ball of radius `bound()`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bump::ScalarCutoff;
use crate::{Error, Result};

/// Tolerance for the projector identity `pi^2 = pi`.
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Tolerance for membership in the image of a projector.
pub const IMAGE_TOL: f64 = 1e-10;
/// Samples at or above `1 - POLE_GAP` make `1/(1 - x)` undefined.
pub const POLE_GAP: f64 = 1e-12;

pub trait NormedSpace: Clone + Send + Sync {
    fn norm(&self) -> f64;
    fn scaled(&self, factor: f64) -> Self;
}

impl NormedSpace for Vec<f64> {
    fn norm(&self) -> f64 {
        euclidean_norm(self)
    }

    fn scaled(&self, factor: f64) -> Self {
        self.iter().map(|x| x * factor).collect()
    }
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Bounded local identity map on a normed space.
pub trait Blid<V>: Send + Sync {
    fn apply(&self, x: &V) -> V;
    /// `H(x) = x` whenever `norm(x) < identity_radius()`.
    fn identity_radius(&self) -> f64;
    /// `norm(H(x)) <= bound()` for every `x`.
    fn bound(&self) -> f64;
}

impl<V, B: Blid<V> + ?Sized> Blid<V> for &B {
    fn apply(&self, x: &V) -> V {
        (**self).apply(x)
    }
    fn identity_radius(&self) -> f64 {
        (**self).identity_radius()
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
}

impl<V, B: Blid<V> + ?Sized> Blid<V> for std::sync::Arc<B> {
    fn apply(&self, x: &V) -> V {
        (**self).apply(x)
    }
    fn identity_radius(&self) -> f64 {
        (**self).identity_radius()
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
}

// ---------------------------------------------------------------------------
// Grid functions

/// Samples `v_i = x(i / G)`, `i = 0..=G`, of a continuous function on `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct GridFunction {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    grid_size: usize,
    values: Vec<f64>,
}

impl TryFrom<GridRepr> for GridFunction {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        if r.values.len() != r.grid_size + 1 {
            return Err(Error::InvalidGrid(format!(
                "grid_size {} needs {} samples, got {}",
                r.grid_size,
                r.grid_size + 1,
                r.values.len()
            )));
        }
        GridFunction::from_values(r.values)
    }
}

impl From<GridFunction> for GridRepr {
    fn from(g: GridFunction) -> Self {
        GridRepr {
            grid_size: g.grid_size(),
            values: g.values,
        }
    }
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need grid_size >= 2, got {} samples",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("sample {i} is not finite")));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(grid_size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let g = grid_size as f64;
        Self::from_values((0..=grid_size).map(|i| f(i as f64 / g)).collect())
    }

    pub fn constant(grid_size: usize, c: f64) -> Result<Self> {
        Self::from_fn(grid_size, |_| c)
    }

    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.grid_size() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid_size() != other.grid_size() {
            return Err(Error::GridMismatch {
                left: self.grid_size(),
                right: other.grid_size(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.check_grid(other)?;
        Ok(GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Composite trapezoid rule on the sample grid.
    pub fn trapezoid(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        (inner + 0.5 * (self.values[0] + self.values[n - 1])) / self.grid_size() as f64
    }

    /// `t,v` rows with a header, one per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,v\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.t(i), v);
        }
        out
    }
}

impl NormedSpace for GridFunction {
    fn norm(&self) -> f64 {
        self.sup_norm()
    }

    fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }
}

pub fn sup_norm(x: &GridFunction) -> f64 {
    x.sup_norm()
}

// ---------------------------------------------------------------------------
// Blid maps

/// `H(x)(t) = h(x(t))` with `h(s) = tau(s) s`, acting pointwise on `C[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C01Blid {
    pub cutoff: ScalarCutoff,
}

impl Blid<GridFunction> for C01Blid {
    fn apply(&self, x: &GridFunction) -> GridFunction {
        x.map(|v| self.cutoff.blid(v))
    }
    fn identity_radius(&self) -> f64 {
        self.cutoff.inner_radius()
    }
    fn bound(&self) -> f64 {
        self.cutoff.outer_radius()
    }
}

pub fn blid_c01(h: &ScalarCutoff, x: &GridFunction) -> GridFunction {
    C01Blid { cutoff: *h }.apply(x)
}

/// `H(x) = tau(|x|^2) x` on `R^m`: identity for `|x| <= sqrt(a)`, image in the
/// ball of radius `sqrt(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallBlid {
    pub cutoff: ScalarCutoff,
}

impl BallBlid {
    pub fn new(cutoff: ScalarCutoff) -> Self {
        BallBlid { cutoff }
    }

    /// Bump `delta(x) = tau(|x|^2)`.
    pub fn bump(&self, x: &[f64]) -> f64 {
        self.cutoff.value(x.iter().map(|v| v * v).sum())
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        let d = self.bump(x);
        if d == 1.0 {
            x.to_vec()
        } else {
            x.iter().map(|v| d * v).collect()
        }
    }
}

impl Blid<Vec<f64>> for BallBlid {
    fn apply(&self, x: &Vec<f64>) -> Vec<f64> {
        self.apply_slice(x)
    }
    fn identity_radius(&self) -> f64 {
        self.cutoff.inner_radius().sqrt()
    }
    fn bound(&self) -> f64 {
        self.cutoff.outer_radius().sqrt()
    }
}

/// `H_1(x) = (eps / N) H((N / eps) x)` for a blid `H` with bound `N`.
///
/// The image lies in the `eps`-ball and `H_1` is the identity on the ball of
/// radius `eps n / N`, where `n` is the identity radius of `H`.
#[derive(Debug, Clone)]
pub struct RescaledBlid<B> {
    inner: B,
    eps: f64,
    big_n: f64,
}

impl<B> RescaledBlid<B> {
    pub fn new<V>(inner: B, eps: f64) -> Result<Self>
    where
        B: Blid<V>,
    {
        Self::with_bound(inner, eps, f64::NAN)
    }

    /// Use an explicit `N >= inner.bound()` (NaN means "use the inner bound").
    pub fn with_bound<V>(inner: B, eps: f64, big_n: f64) -> Result<Self>
    where
        B: Blid<V>,
    {
        let big_n = if big_n.is_nan() { inner.bound() } else { big_n };
        let n = inner.identity_radius();
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("rescale radius must be positive, got {eps}")));
        }
        if !(big_n >= inner.bound() && big_n >= n && n > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need N >= bound(H) = {} and N >= n = {n} > 0, got N = {big_n}",
                inner.bound()
            )));
        }
        Ok(RescaledBlid { inner, eps, big_n })
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<V: NormedSpace, B: Blid<V>> Blid<V> for RescaledBlid<B> {
    fn apply(&self, x: &V) -> V {
        let up = self.big_n / self.eps;
        if x.norm() * up < self.inner.identity_radius() {
            return x.clone();
        }
        self.inner.apply(&x.scaled(up)).scaled(self.eps / self.big_n)
    }
    fn identity_radius(&self) -> f64 {
        self.eps * self.inner.identity_radius() / self.big_n
    }
    fn bound(&self) -> f64 {
        self.eps * self.inner.bound() / self.big_n
    }
}

pub fn rescale_blid<V: NormedSpace, B: Blid<V>>(h: &B, eps: f64, x: &V) -> Result<V> {
    Ok(RescaledBlid::new(h, eps)?.apply(x))
}

// ---------------------------------------------------------------------------
// Segment blid

/// Segment `[phi, psi]` in `C[0,1]` with the two-variable cutoff
/// `h(t, s) = tau(dist(s, [min(phi,psi)(t) - r, max(phi,psi)(t) + r]))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub cutoff: ScalarCutoff,
    pub margin: f64,
}

impl SegmentSpec {
    pub fn new(
        lower: GridFunction,
        upper: GridFunction,
        cutoff: ScalarCutoff,
        margin: f64,
    ) -> Result<Self> {
        lower.check_grid(&upper)?;
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::InvalidInput(format!("margin must be >= 0, got {margin}")));
        }
        Ok(SegmentSpec {
            lower,
            upper,
            cutoff,
            margin,
        })
    }

    /// Ball `{x : |x - z| <= r}` as the segment `[z - r, z + r]`.
    pub fn ball(center: &GridFunction, radius: f64, cutoff: ScalarCutoff, margin: f64) -> Result<Self> {
        Self::new(
            center.map(|v| v - radius),
            center.map(|v| v + radius),
            cutoff,
            margin,
        )
    }

    fn band(&self, i: usize) -> (f64, f64) {
        let (p, q) = (self.lower.values[i], self.upper.values[i]);
        (p.min(q) - self.margin, p.max(q) + self.margin)
    }

    /// `h(t_i, s)`.
    pub fn weight(&self, i: usize, s: f64) -> f64 {
        let (lo, hi) = self.band(i);
        let dist = (lo - s).max(s - hi).max(0.0);
        self.cutoff.value(dist)
    }

    /// Whether the graph of `x` lies where `h(t, .) = 1`.
    pub fn contains(&self, x: &GridFunction) -> bool {
        x.grid_size() == self.lower.grid_size()
            && x.values.iter().enumerate().all(|(i, &v)| self.weight(i, v) == 1.0)
    }

    /// Uniform bound on `|H_y(x)(t) - y(t)|` over all `x`.
    pub fn deviation_bound(&self, y: &GridFunction) -> Result<f64> {
        self.lower.check_grid(y)?;
        let b = self.cutoff.outer_radius();
        Ok((0..y.values.len())
            .map(|i| {
                let (lo, hi) = self.band(i);
                let yi = y.values[i];
                (hi + b - yi).abs().max((lo - b - yi).abs())
            })
            .fold(0.0, f64::max))
    }
}

/// `H_y(x)(t) = y(t) + h(t, x(t)) (x(t) - y(t))`.
pub fn blid_at_segment(spec: &SegmentSpec, y: &GridFunction, x: &GridFunction) -> Result<GridFunction> {
    spec.lower.check_grid(y)?;
    spec.lower.check_grid(x)?;
    let values = x
        .values
        .iter()
        .zip(&y.values)
        .enumerate()
        .map(|(i, (&xi, &yi))| {
            let w = spec.weight(i, xi);
            if w == 1.0 {
                xi
            } else if w == 0.0 {
                yi
            } else {
                yi + w * (xi - yi)
            }
        })
        .collect();
    Ok(GridFunction { values })
}

// ---------------------------------------------------------------------------
// Projectors

/// Idempotent `m x m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: DMatrix<f64>,
}

impl Projector {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let defect = (&matrix * &matrix - &matrix).amax();
        if !(defect <= PROJECTOR_TOL) {
            return Err(Error::NotProjector { defect });
        }
        Ok(Projector { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    pub fn complement(&self) -> Projector {
        let n = self.dim();
        Projector {
            matrix: DMatrix::identity(n, n) - &self.matrix,
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn image_residual(&self, x: &[f64]) -> f64 {
        let px = self.apply(x);
        euclidean_norm(&px.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>())
    }
}

/// `pi(H(x))` for `x` in the image of `pi`: a blid on `Im(pi)`.
pub fn restrict_blid<B: Blid<Vec<f64>> + ?Sized>(h: &B, pi: &Projector, x: &[f64]) -> Result<Vec<f64>> {
    pi.check_len(x)?;
    let residual = pi.image_residual(x);
    if residual > IMAGE_TOL * euclidean_norm(x).max(1.0) {
        return Err(Error::NotInImage { residual });
    }
    let hx = h.apply(&x.to_vec());
    if hx.as_slice() == x {
        return Ok(hx);
    }
    Ok(pi.apply(&hx))
}

/// `(H - pi H)(x)` for `x` in the kernel of `pi`: a blid on `Ker(pi)`.
pub fn restrict_blid_kernel<B: Blid<Vec<f64>> + ?Sized>(h: &B, pi: &Projector, x: &[f64]) -> Result<Vec<f64>> {
    restrict_blid(h, &pi.complement(), x)
}

// ---------------------------------------------------------------------------
// Integral functional

/// `int_0^1 dt / (1 - x(t))`, or with `extended` the everywhere-defined
/// `int_0^1 dt / (1 - h(x(t)))`, by the composite trapezoid rule.
pub fn integral_functional(x: &GridFunction, extended: bool, h: &ScalarCutoff) -> Result<f64> {
    if extended {
        return Ok(x.map(|v| 1.0 / (1.0 - h.blid(v))).trapezoid());
    }
    if let Some((index, &value)) = x
        .values
        .iter()
        .enumerate()
        .find(|(_, &v)| v >= 1.0 - POLE_GAP)
    {
        return Err(Error::PoleOnGrid { index, value });
    }
    Ok(x.map(|v| 1.0 / (1.0 - v)).trapezoid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::make_cutoff;
    use crate::rng;
    use rand::Rng;

    fn h() -> ScalarCutoff {
        make_cutoff(1.0 / 3.0, 0.5).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::from_values(vec![0.0, 1.0]).is_err());
        assert!(GridFunction::from_values(vec![0.0, f64::NAN, 1.0]).is_err());
        let a = GridFunction::constant(4, 1.0).unwrap();
        let b = GridFunction::constant(5, 1.0).unwrap();
        assert!(matches!(a.zip_with(&b, |x, y| x + y), Err(Error::GridMismatch { left: 4, right: 5 })));
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(GridFunction::constant(10, 0.0).unwrap().sup_norm(), 0.0);
        assert_eq!(GridFunction::from_fn(10, |t| t).unwrap().sup_norm(), 1.0);
        let s = GridFunction::from_fn(1000, |t| (2.0 * std::f64::consts::PI * t).sin()).unwrap();
        // dense-grid oracle
        let dense = (0..=1_000_000)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 1e6).sin().abs())
            .fold(0.0, f64::max);
        assert!((s.sup_norm() - dense).abs() < 1e-4);
    }

    #[test]
    fn json_and_csv() {
        let g = GridFunction::from_fn(4, |t| t * t).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.starts_with(r#"{"grid_size":4,"values":["#));
        let back: GridFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GridFunction>(r#"{"grid_size":3,"values":[0,1,2]}"#).is_err());
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert_eq!(csv.lines().nth(3).unwrap(), "0.5,0.25");
    }

    #[test]
    fn c01_blid_examples() {
        let h = h();
        let zero = GridFunction::constant(50, 0.0).unwrap();
        assert_eq!(blid_c01(&h, &zero), zero);
        let small = GridFunction::from_fn(50, |t| 0.2 * (3.0 * t).sin()).unwrap();
        assert_eq!(blid_c01(&h, &small), small);
        let ten = GridFunction::constant(50, 10.0).unwrap();
        assert_eq!(blid_c01(&h, &ten), zero);
    }

    #[test]
    fn c01_blid_bounds_random() {
        let h = h();
        let mut r = rng::seeded(7);
        for _ in 0..200 {
            let amp = r.gen_range(0.0..100.0);
            let x = GridFunction::from_values(rng::uniform_vec(&mut r, 41, amp)).unwrap();
            let hx = blid_c01(&h, &x);
            assert!(hx.sup_norm() <= 0.5);
            if x.sup_norm() < 1.0 / 3.0 {
                assert_eq!(hx, x);
            }
        }
    }

    #[test]
    fn rescaled_blid() {
        let base = C01Blid { cutoff: h() };
        let eps = 0.05;
        let big_n = base.bound();
        let n = base.identity_radius();
        let zero = GridFunction::constant(20, 0.0).unwrap();
        assert_eq!(rescale_blid(&base, eps, &zero).unwrap(), zero);
        let x = GridFunction::from_fn(20, |t| eps * n / (2.0 * big_n) * (1.0 - 2.0 * t)).unwrap();
        assert_eq!(rescale_blid(&base, eps, &x).unwrap(), x);
        let big = GridFunction::from_fn(20, |t| 100.0 * eps * (t - 0.3)).unwrap();
        assert!(rescale_blid(&base, eps, &big).unwrap().sup_norm() <= eps);
        assert!(rescale_blid(&base, -1.0, &big).is_err());
    }

    #[test]
    fn ball_blid_on_rn() {
        let b = BallBlid::new(h());
        assert!((b.identity_radius() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let x = vec![0.3, -0.2];
        assert_eq!(b.apply(&x), x);
        let far = vec![3.0, 4.0];
        assert_eq!(b.apply(&far), vec![0.0, 0.0]);
        let mut r = rng::seeded(3);
        for _ in 0..500 {
            let x = rng::uniform_vec(&mut r, 3, 2.0);
            assert!(euclidean_norm(&b.apply(&x)) <= b.bound());
        }
    }

    #[test]
    fn segment_blid_examples() {
        let g = 30;
        let phi = GridFunction::from_fn(g, |t| t - 0.5).unwrap();
        let psi = GridFunction::from_fn(g, |t| (t * 3.0).sin()).unwrap();
        let spec = SegmentSpec::new(phi.clone(), psi.clone(), h(), 0.1).unwrap();
        let y = GridFunction::from_fn(g, |t| 5.0 * t).unwrap();

        let inside = phi.zip_with(&psi, |a, b| 0.5 * (a + b)).unwrap();
        assert!(spec.contains(&inside));
        assert_eq!(blid_at_segment(&spec, &y, &inside).unwrap(), inside);

        let far = GridFunction::constant(g, 100.0).unwrap();
        assert_eq!(blid_at_segment(&spec, &y, &far).unwrap(), y);
        assert_eq!(blid_at_segment(&spec, &y, &y).unwrap(), y);

        let bound = spec.deviation_bound(&y).unwrap();
        let mut r = rng::seeded(11);
        for _ in 0..200 {
            let x = GridFunction::from_values(rng::uniform_vec(&mut r, g + 1, 10.0)).unwrap();
            let hx = blid_at_segment(&spec, &y, &x).unwrap();
            let dev = hx.zip_with(&y, |a, b| (a - b).abs()).unwrap().sup_norm();
            assert!(dev <= bound);
        }
        let other = GridFunction::constant(g + 1, 0.0).unwrap();
        assert!(matches!(blid_at_segment(&spec, &other, &inside), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn ball_segment() {
        let z = GridFunction::from_fn(10, |t| t).unwrap();
        let spec = SegmentSpec::ball(&z, 0.25, h(), 0.0).unwrap();
        let y = GridFunction::constant(10, 0.0).unwrap();
        let x = z.map(|v| v + 0.2);
        assert_eq!(blid_at_segment(&spec, &y, &x).unwrap(), x);
    }

    #[test]
    fn projector_restriction() {
        let pi = Projector::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(Projector::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).is_err());
        let hb = BallBlid::new(h());
        assert_eq!(restrict_blid(&hb, &pi, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(restrict_blid(&hb, &pi, &[0.1, 0.0]).unwrap(), vec![0.1, 0.0]);
        let x = [0.65, 0.0];
        let out = restrict_blid(&hb, &pi, &x).unwrap();
        // compose-then-project oracle
        let d = h().value(0.65 * 0.65);
        let direct = pi.apply(&[d * 0.65, 0.0]);
        assert!((out[0] - direct[0]).abs() < 1e-15 && out[1] == direct[1]);
        assert!(euclidean_norm(&pi.apply(&out).iter().zip(&out).map(|(a, b)| a - b).collect::<Vec<_>>()) <= 1e-10);
        assert!(matches!(restrict_blid(&hb, &pi, &[0.0, 1.0]), Err(Error::NotInImage { .. })));
        // kernel of pi is spanned by (1, -1)
        let k = [0.2, -0.2];
        assert_eq!(restrict_blid_kernel(&hb, &pi, &k).unwrap(), k.to_vec());
    }

    #[test]
    fn integral_functional_examples() {
        let h = h();
        let zero = GridFunction::constant(200, 0.0).unwrap();
        assert_eq!(integral_functional(&zero, false, &h).unwrap(), 1.0);
        let half = GridFunction::constant(200, 0.5).unwrap();
        assert!((integral_functional(&half, false, &h).unwrap() - 2.0).abs() < 1e-12);
        let ten = GridFunction::constant(200, 10.0).unwrap();
        assert!(matches!(integral_functional(&ten, false, &h), Err(Error::PoleOnGrid { index: 0, .. })));
        assert_eq!(integral_functional(&ten, true, &h).unwrap(), 1.0);
        // trapezoid converges at O(G^-2) on a smooth integrand
        let x = GridFunction::from_fn(200, |t| 0.5 * t).unwrap();
        let exact = 2.0 * 2.0f64.ln();
        assert!((integral_functional(&x, false, &h).unwrap() - exact).abs() < 1e-5);
    }

    #[test]
    fn extension_agrees_inside_identity_ball() {
        let h = h();
        let mut r = rng::seeded(5);
        for _ in 0..100 {
            let x = GridFunction::from_values(rng::uniform_vec(&mut r, 201, 0.33)).unwrap();
            assert_eq!(
                integral_functional(&x, true, &h).unwrap(),
                integral_functional(&x, false, &h).unwrap()
            );
        }
    }
}
