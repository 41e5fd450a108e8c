//! Flat and vanishing decompositions along a hyperbolic splitting.

use std::sync::Arc;

use crate::bump::ScalarCutoff;
use crate::fd;
use crate::funcspace::Blid;
use crate::{Error, Result};

use super::series::ScalarFn;
use super::splitting::HyperbolicSplitting;

/// Highest Taylor order used by [`flat_split`].
pub const MAX_FLAT_ORDER: usize = 3;
/// Largest finite-difference step used by [`flat_split`].
pub const FLAT_FD_STEP: f64 = 0.05;

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `H(y) = c tau(|y|^2 / c^2) y` on a subspace (given in ambient
/// coordinates): identity for `|y| <= c sqrt(a)`, image in the ball of
/// radius `c sqrt(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceBlid {
    pub cutoff: ScalarCutoff,
    pub scale: f64,
}

impl SubspaceBlid {
    pub fn new(cutoff: ScalarCutoff, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput(format!("blid scale must be positive, got {scale}")));
        }
        Ok(SubspaceBlid { cutoff, scale })
    }

    /// Scale chosen so that the bound is `fraction * radius`.
    pub fn with_bound(cutoff: ScalarCutoff, radius: f64, fraction: f64) -> Result<Self> {
        Self::new(cutoff, fraction * radius / cutoff.outer_radius().sqrt())
    }

    pub fn is_identity_at(&self, y: &[f64]) -> bool {
        let r2 = y.iter().map(|v| v * v).sum::<f64>() / (self.scale * self.scale);
        r2 <= self.cutoff.inner_radius()
    }

    pub fn apply_slice(&self, y: &[f64]) -> Vec<f64> {
        let r2 = y.iter().map(|v| v * v).sum::<f64>() / (self.scale * self.scale);
        let t = self.cutoff.value(r2);
        if t == 1.0 {
            y.to_vec()
        } else {
            y.iter().map(|v| t * v).collect()
        }
    }
}

impl Blid<Vec<f64>> for SubspaceBlid {
    fn apply(&self, x: &Vec<f64>) -> Vec<f64> {
        self.apply_slice(x)
    }
    fn identity_radius(&self) -> f64 {
        self.scale * self.cutoff.inner_radius().sqrt()
    }
    fn bound(&self) -> f64 {
        self.scale * self.cutoff.outer_radius().sqrt()
    }
}

/// `H(x) = H_+(pi_+ x) + H_-(pi_- x)` with the same cutoff and scale on
/// both sides; returns `x` itself where both parts are the identity.
#[derive(Debug, Clone)]
pub struct ProductBlid {
    split: Arc<HyperbolicSplitting>,
    side: SubspaceBlid,
    projector_norm: f64,
}

impl ProductBlid {
    pub fn new(split: Arc<HyperbolicSplitting>, side: SubspaceBlid) -> Self {
        let projector_norm = split.projector_norm();
        ProductBlid {
            split,
            side,
            projector_norm,
        }
    }

    pub fn side(&self) -> &SubspaceBlid {
        &self.side
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        let xp = self.split.project_plus(x);
        let xm = self.split.project_minus(x);
        if self.side.is_identity_at(&xp) && self.side.is_identity_at(&xm) {
            return x.to_vec();
        }
        let hp = self.side.apply_slice(&xp);
        let hm = self.side.apply_slice(&xm);
        hp.iter().zip(&hm).map(|(a, b)| a + b).collect()
    }
}

impl Blid<Vec<f64>> for ProductBlid {
    fn apply(&self, x: &Vec<f64>) -> Vec<f64> {
        self.apply_slice(x)
    }
    /// Euclidean radius on which both parts are the identity.
    fn identity_radius(&self) -> f64 {
        self.side.identity_radius() / self.projector_norm.max(1.0)
    }
    fn bound(&self) -> f64 {
        2.0 * self.side.bound()
    }
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 || !x.is_finite() {
        return f64::MIN_POSITIVE * f64::EPSILON;
    }
    let exp = ((x.to_bits() >> 52) & 0x7ff) as i32;
    if exp == 0 {
        return f64::MIN_POSITIVE * f64::EPSILON;
    }
    2f64.powi(exp - 1023 - 52)
}

/// A value within a few ulps of `part` such that
/// `part' + (total - part') == total` in floating point. Such a value exists
/// whenever `|part| <= |total|`; otherwise the sum may be off by an ulp.
pub fn exact_part(total: f64, part: f64) -> f64 {
    let holds = |p: f64| p + (total - p) == total;
    if !total.is_finite() || !part.is_finite() || holds(part) {
        return part;
    }
    let diff = total - part;
    let mut scales = [ulp(total), ulp(part), ulp(diff)];
    scales.sort_by(f64::total_cmp);
    for s in scales {
        for mult in [1.0, 2.0, 4.0] {
            let g = s * mult;
            let p = (part / g).round() * g;
            if holds(p) {
                return p;
            }
            let p = total - (diff / g).round() * g;
            if holds(p) {
                return p;
            }
        }
    }
    part
}

/// Output of [`flat_split`].
#[derive(Clone)]
pub struct FlatSplit {
    /// Flat (to the Taylor order) on `X_+` near 0.
    pub f_plus: ScalarFn,
    /// Flat (to the Taylor order) on `X_-` near 0.
    pub f_minus: ScalarFn,
    /// Euclidean radius of the ball on which the decomposition holds.
    pub u_radius: f64,
    pub blid: ProductBlid,
}

impl std::fmt::Debug for FlatSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlatSplit")
            .field("u_radius", &self.u_radius)
            .field("blid", &self.blid)
            .finish_non_exhaustive()
    }
}

/// Split a function flat at 0 as `f0 = f_plus + f_minus`.
///
/// `f_plus(x) = sum_{j<=J} (1/j!) D^j_{x_+}[f0 o H](x_-) (H_+(x_+))^j` is the
/// Taylor expansion of `f0 o H` in the `X_+` directions about the point
/// `x_- in X_-`; `f_minus = f0 - f_plus`. Derivatives are central differences
/// with Richardson extrapolation.
pub fn flat_split(f0: ScalarFn, split: &HyperbolicSplitting, tau: &ScalarCutoff, j_max: usize) -> Result<FlatSplit> {
    if j_max > MAX_FLAT_ORDER {
        return Err(Error::OrderTooHigh {
            order: j_max,
            max: MAX_FLAT_ORDER,
        });
    }
    let split = Arc::new(split.clone());
    let side = SubspaceBlid::new(*tau, 1.0)?;
    let blid = ProductBlid::new(split.clone(), side);
    let u_radius = blid.identity_radius();
    let h = FLAT_FD_STEP.min(0.1 * u_radius);

    let raw_plus = {
        let f0 = f0.clone();
        let blid = blid.clone();
        let split = split.clone();
        move |x: &[f64]| -> f64 {
            let xm = split.project_minus(x);
            let w = side.apply_slice(&split.project_plus(x));
            let composed = |y: &[f64]| f0(&blid.apply_slice(y));
            let mut sum = composed(&xm);
            let wn = norm2(&w);
            if wn == 0.0 {
                return sum;
            }
            let u: Vec<f64> = w.iter().map(|v| v / wn).collect();
            let mut fact = 1.0;
            for j in 1..=j_max {
                fact *= j as f64;
                let d = fd::directional_derivative(&composed, &xm, &u, j, h, fd::DEFAULT_LEVELS);
                sum += d * wn.powi(j as i32) / fact;
            }
            sum
        }
    };
    let raw_plus: ScalarFn = Arc::new(raw_plus);
    let f_plus: ScalarFn = {
        let f0 = f0.clone();
        let raw = raw_plus.clone();
        Arc::new(move |x: &[f64]| exact_part(f0(x), raw(x)))
    };
    let f_minus: ScalarFn = {
        let f0 = f0.clone();
        let raw = raw_plus;
        Arc::new(move |x: &[f64]| {
            let total = f0(x);
            total - exact_part(total, raw(x))
        })
    };
    Ok(FlatSplit {
        f_plus,
        f_minus,
        u_radius,
        blid,
    })
}

/// Split a function vanishing on the split-norm ball of radius `delta` as
/// `v = v_plus + v_minus` with `v_plus(x) = v(x_+ + H_-(x_-))`.
///
/// `v_plus` vanishes where `|x_+| < eps` and `v_minus` where `|x_-| < eps`,
/// `eps` being the identity radius of `h_minus`.
pub fn vanishing_split(
    v: ScalarFn,
    split: &HyperbolicSplitting,
    h_minus: &SubspaceBlid,
    delta: f64,
) -> Result<(ScalarFn, ScalarFn)> {
    let bound = h_minus.bound();
    if !(bound < delta) {
        return Err(Error::BoundViolation { bound, delta });
    }
    let split = Arc::new(split.clone());
    let h = *h_minus;
    let raw: ScalarFn = {
        let v = v.clone();
        Arc::new(move |x: &[f64]| {
            let xm = split.project_minus(x);
            if h.is_identity_at(&xm) {
                return v(x);
            }
            let hm = h.apply_slice(&xm);
            let arg: Vec<f64> = split.project_plus(x).iter().zip(&hm).map(|(a, b)| a + b).collect();
            v(&arg)
        })
    };
    let v_plus: ScalarFn = {
        let v = v.clone();
        let raw = raw.clone();
        Arc::new(move |x: &[f64]| exact_part(v(x), raw(x)))
    };
    let v_minus: ScalarFn = Arc::new(move |x: &[f64]| {
        let total = v(x);
        total - exact_part(total, raw(x))
    });
    Ok((v_plus, v_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomo::splitting::{split_hyperbolic, DEFAULT_MARGIN};
    use crate::rng;
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    fn saddle() -> HyperbolicSplitting {
        split_hyperbolic(
            &DMatrix::from_diagonal(&DVector::from_column_slice(&[0.5, 2.0])),
            DEFAULT_MARGIN,
        )
        .unwrap()
    }

    fn flat() -> ScalarFn {
        Arc::new(|x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                0.0
            } else {
                (-1.0 / r2).exp() * x[0]
            }
        })
    }

    #[test]
    fn exact_part_sums_back() {
        let mut r = rng::seeded(8);
        for _ in 0..10_000 {
            let e = r.gen_range(-20..5);
            let total: f64 = r.gen_range(-1.0..1.0) * 10f64.powi(e);
            let part: f64 = total * r.gen_range(-1.0..=1.0) * 10f64.powi(r.gen_range(-12..=0));
            let p = exact_part(total, part);
            assert_eq!(p + (total - p), total, "total {total:e} part {part:e}");
            assert!((p - part).abs() <= 8.0 * ulp(total.abs().max(part.abs())));
            // beyond that ratio exactness is impossible; stay within an ulp
            let big = total * r.gen_range(1e3..1e9);
            let p = exact_part(total, big);
            assert!((p + (total - p) - total).abs() <= ulp(big));
        }
        assert_eq!(exact_part(3.0, 0.0), 0.0);
        assert_eq!(exact_part(3.0, 3.0), 3.0);
    }

    #[test]
    fn product_blid() {
        let s = Arc::new(saddle());
        let b = ProductBlid::new(s, SubspaceBlid::new(ScalarCutoff::standard(), 1.0).unwrap());
        let x = vec![0.3, -0.2];
        assert_eq!(b.apply(&x), x);
        let far = b.apply(&vec![40.0, -7.0]);
        assert!(far.iter().all(|v| v.abs() <= 0.5f64.sqrt()));
    }

    #[test]
    fn zero_splits_to_zero() {
        let zero: ScalarFn = Arc::new(|_: &[f64]| 0.0);
        let fs = flat_split(zero.clone(), &saddle(), &ScalarCutoff::standard(), 3).unwrap();
        let h = SubspaceBlid::with_bound(ScalarCutoff::standard(), 0.5, 0.9).unwrap();
        let (vp, vm) = vanishing_split(zero, &saddle(), &h, 0.5).unwrap();
        for x in [[0.1, 0.2], [3.0, -4.0]] {
            assert_eq!((fs.f_plus)(&x), 0.0);
            assert_eq!((fs.f_minus)(&x), 0.0);
            assert_eq!(vp(&x), 0.0);
            assert_eq!(vm(&x), 0.0);
        }
    }

    #[test]
    fn flat_parts_are_flat_on_their_axes() {
        let fs = flat_split(flat(), &saddle(), &ScalarCutoff::standard(), 3).unwrap();
        let f0 = flat();
        let mut r = rng::seeded(4);
        let hh = 0.02;
        for _ in 0..20 {
            let t = r.gen_range(-0.8..0.8) * fs.u_radius;
            let on_plus = [t, 0.0];
            let on_minus = [0.0, t];
            assert_eq!((fs.f_plus)(&on_plus) + (fs.f_minus)(&on_plus), f0(&on_plus));
            for order in 0..=3 {
                for dir in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
                    let dp = fd::directional_derivative(&*fs.f_plus, &on_plus, &dir, order, hh, 3);
                    let dm = fd::directional_derivative(&*fs.f_minus, &on_minus, &dir, order, hh, 3);
                    assert!(dp.abs() <= 1e-4, "plus order {order} at {t}: {dp}");
                    assert!(dm.abs() <= 1e-4, "minus order {order} at {t}: {dm}");
                }
            }
        }
    }

    #[test]
    fn strip_vanishing() {
        let delta = 0.4;
        let v: ScalarFn = Arc::new(move |x: &[f64]| {
            let n = x[0].abs().max(x[1].abs());
            (n - delta).max(0.0).powi(3) * x[0]
        });
        let h = SubspaceBlid::with_bound(ScalarCutoff::standard(), delta, 0.95).unwrap();
        let eps = h.identity_radius();
        let (vp, vm) = vanishing_split(v.clone(), &saddle(), &h, delta).unwrap();
        let mut r = rng::seeded(6);
        for _ in 0..2000 {
            let big = r.gen_range(-5.0..5.0);
            let small = r.gen_range(-eps..eps) * 0.999;
            assert_eq!(vp(&[small, big]), 0.0);
            assert_eq!(vm(&[big, small]), 0.0);
            let x = [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)];
            assert_eq!(vp(&x) + vm(&x), v(&x));
        }
        let wide = SubspaceBlid::with_bound(ScalarCutoff::standard(), delta, 1.0).unwrap();
        assert!(matches!(
            vanishing_split(v, &saddle(), &wide, delta),
            Err(Error::BoundViolation { .. })
        ));
    }
}
