//! Local flat solutions, globalization and the full solver.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bump::ScalarCutoff;
use crate::fd;
use crate::funcspace::Blid;
use crate::rng;
use crate::{Error, Result};

use super::decomp::{flat_split, vanishing_split, ProductBlid, SubspaceBlid, MAX_FLAT_ORDER};
use super::series::{sum_heuristic, Direction, ScalarFn, MAX_TERMS};
use super::splitting::HyperbolicSplitting;

/// Residual threshold a local solution must meet before globalization.
pub const LOCAL_RESIDUAL_LIMIT: f64 = 1e-9;
const LOCAL_CHECK_SAMPLES: usize = 256;
const FLATNESS_LIMIT: f64 = 1e-6;
/// Fraction of the blid bound allowed by the vanishing radius.
const BOUND_FRACTION: f64 = 0.99;

/// `max |g(Ax) - g(x) - f(x)|` over `points`, evaluated in parallel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualStats {
    pub max_residual: f64,
    pub samples: usize,
    pub worst_point: Vec<f64>,
}

pub fn residuals(split: &HyperbolicSplitting, g: &ScalarFn, f: &ScalarFn, points: &[Vec<f64>]) -> Vec<f64> {
    points
        .par_iter()
        .map(|x| {
            let ax = split.apply(x);
            (g(&ax) - g(x) - f(x)).abs()
        })
        .collect()
}

pub fn residual_stats(split: &HyperbolicSplitting, g: &ScalarFn, f: &ScalarFn, points: &[Vec<f64>]) -> ResidualStats {
    let res = residuals(split, g, f, points);
    let (idx, max) = res
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, &r)| if r > best.1 || r.is_nan() { (i, r) } else { best });
    ResidualStats {
        max_residual: max,
        samples: points.len(),
        worst_point: points.get(idx).cloned().unwrap_or_default(),
    }
}

/// Seeded uniform samples in the box `[-w, w]^m`.
pub fn box_samples(m: usize, half_width: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    (0..count).map(|_| rng::uniform_vec(&mut r, m, half_width)).collect()
}

/// Seeded uniform samples in the Euclidean ball of radius `radius`.
pub fn ball_samples(m: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    (0..count).map(|_| rng::in_ball(&mut r, m, radius)).collect()
}

/// Check that `f` and its first two directional derivatives vanish at 0
/// along the coordinate axes.
pub fn check_flat(f: &dyn Fn(&[f64]) -> f64, m: usize) -> Result<()> {
    let origin = vec![0.0; m];
    for i in 0..m {
        let mut dir = vec![0.0; m];
        dir[i] = 1.0;
        for order in 0..=2 {
            let value = fd::directional_derivative(f, &origin, &dir, order, 0.05, fd::DEFAULT_LEVELS);
            if value.abs() > FLATNESS_LIMIT {
                return Err(Error::NotFlat {
                    order,
                    value,
                    direction: dir,
                });
            }
        }
    }
    Ok(())
}

/// A solution of the equation near 0.
#[derive(Clone)]
pub struct LocalSolution {
    pub w: ScalarFn,
    /// Euclidean radius of the ball on which the residual is certified.
    pub radius: f64,
    /// Largest residual seen on the verification samples.
    pub max_residual: f64,
    /// Largest number of series terms used on the verification samples.
    pub max_terms: usize,
}

impl std::fmt::Debug for LocalSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalSolution")
            .field("radius", &self.radius)
            .field("max_residual", &self.max_residual)
            .field("max_terms", &self.max_terms)
            .finish_non_exhaustive()
    }
}

struct TwoSided {
    split: Arc<HyperbolicSplitting>,
    blid: ProductBlid,
    f_plus: ScalarFn,
    f_minus: ScalarFn,
    tol: f64,
}

impl TwoSided {
    /// `(value, terms)` or the divergence error.
    ///
    /// A series is only stopped once the growing component of the orbit has
    /// left the support of the blid; from then on the terms decay
    /// monotonically and the geometric tail test applies.
    fn eval(&self, x: &[f64]) -> std::result::Result<(f64, usize), (usize, f64)> {
        let q = self.split.q();
        let ratio = q / (1.0 - q);
        let support = self.blid.side().bound();
        let run = |f: &ScalarFn, forward: bool| {
            let mut y = x.to_vec();
            if !forward {
                y = self.split.apply_inverse(&y);
            }
            let mut sum = 0.0;
            let mut prev = f64::INFINITY;
            for k in 0..MAX_TERMS {
                let t = f(&self.blid.apply_slice(&y));
                sum += t;
                let growing = if forward {
                    self.split.project_minus(&y)
                } else {
                    self.split.project_plus(&y)
                };
                let gn = growing.iter().map(|v| v * v).sum::<f64>().sqrt();
                let escaped = gn == 0.0 || gn >= support;
                if escaped && t.abs().max(prev) * ratio <= 0.1 * self.tol {
                    return Ok((sum, k + 1));
                }
                prev = t.abs();
                y = if forward { self.split.apply(&y) } else { self.split.apply_inverse(&y) };
            }
            Err((MAX_TERMS, prev * ratio))
        };
        let (a, ka) = run(&self.f_minus, true)?;
        let (b, kb) = run(&self.f_plus, false)?;
        Ok((b - a, ka.max(kb)))
    }
}

/// Value and term count, or the failing term count and tail estimate.
type TermEval = Arc<dyn Fn(&[f64]) -> std::result::Result<(f64, usize), (usize, f64)> + Send + Sync>;

/// Local solution `w = w_+ + w_-` for a function flat at 0.
///
/// With `f0 = f_plus + f_minus` from [`flat_split`] and a blid `H_S` whose
/// image stays where the split is valid,
/// `w(x) = -sum_{k>=0} f_minus(H_S(A^k x)) + sum_{k>=1} f_plus(H_S(A^-k x))`,
/// which satisfies `w(Ax) - w(x) = f0(H_S(x))`. One-sided splittings reduce
/// to the plain contraction or expansion series.
pub fn solve_flat_local(f0: ScalarFn, split: &HyperbolicSplitting, tau: &ScalarCutoff, tol: f64) -> Result<LocalSolution> {
    let m = split.dim();
    check_flat(&*f0, m)?;
    let a = tau.inner_radius();
    let b = tau.outer_radius();

    let (w, radius): (TermEval, f64) =
        if split.dim_minus() == 0 || split.dim_plus() == 0 {
            let direction = if split.dim_minus() == 0 {
                Direction::Contraction
            } else {
                Direction::Expansion
            };
            let s = Arc::new(split.clone());
            let f = f0.clone();
            let eval = move |x: &[f64]| match sum_heuristic(&s, &*f, x, direction, 0.1 * tol) {
                Ok(v) => Ok((v.value, v.terms)),
                Err(Error::SeriesDiverged { terms, tail }) => Err((terms, tail)),
                Err(_) => Err((0, f64::NAN)),
            };
            (Arc::new(eval), a.sqrt())
        } else {
            let fs = flat_split(f0.clone(), split, tau, MAX_FLAT_ORDER)?;
            let shared = Arc::new(split.clone());
            let series_side = SubspaceBlid::new(*tau, (a / b).sqrt())?;
            let blid = ProductBlid::new(shared.clone(), series_side);
            let radius = blid.identity_radius();
            let two = TwoSided {
                split: shared,
                blid,
                f_plus: fs.f_plus,
                f_minus: fs.f_minus,
                tol,
            };
            (Arc::new(move |x: &[f64]| two.eval(x)), radius)
        };

    let points = ball_samples(m, 0.999 * radius, LOCAL_CHECK_SAMPLES, 0x10ca1);
    let checks: Vec<std::result::Result<(f64, usize), (usize, f64)>> = points
        .par_iter()
        .map(|x| {
            let (wx, k1) = w(x)?;
            let (wax, k2) = w(&split.apply(x))?;
            Ok(((wax - wx - f0(x)).abs(), k1.max(k2)))
        })
        .collect();
    let mut max_residual: f64 = 0.0;
    let mut max_terms = 0;
    for (x, c) in points.iter().zip(checks) {
        match c {
            Ok((r, k)) => {
                if !(r <= tol) {
                    return Err(Error::LocalResidualTooLarge {
                        residual: r,
                        limit: tol,
                        point: x.clone(),
                    });
                }
                max_residual = max_residual.max(r);
                max_terms = max_terms.max(k);
            }
            Err((terms, tail)) => return Err(Error::SeriesDiverged { terms, tail }),
        }
    }
    let w: ScalarFn = Arc::new(move |x: &[f64]| match w(x) {
        Ok((v, _)) => v,
        Err(_) => f64::NAN,
    });
    Ok(LocalSolution {
        w,
        radius,
        max_residual,
        max_terms,
    })
}

/// Global solution produced by [`globalize`].
#[derive(Clone)]
pub struct GlobalSolution {
    pub g: ScalarFn,
    /// Terms of `h_+` and `h_-` needed on the query box.
    pub k0_plus: usize,
    pub k0_minus: usize,
    /// Strip width `eps` (identity radius of `H_-`).
    pub epsilon: f64,
    /// Split-norm radius on which `v` vanishes.
    pub vanishing_radius: f64,
    pub half_width: f64,
}

impl GlobalSolution {
    pub fn k0(&self) -> usize {
        self.k0_plus.max(self.k0_minus)
    }
}

impl std::fmt::Debug for GlobalSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GlobalSolution")
            .field("k0_plus", &self.k0_plus)
            .field("k0_minus", &self.k0_minus)
            .field("epsilon", &self.epsilon)
            .field("vanishing_radius", &self.vanishing_radius)
            .field("half_width", &self.half_width)
            .finish_non_exhaustive()
    }
}

fn box_vertices(m: usize, w: f64) -> Vec<Vec<f64>> {
    (0..1usize << m)
        .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { w } else { -w }).collect())
        .collect()
}

/// Smallest `k` with `q^k bound < eps`.
pub fn strip_entry(q: f64, bound: f64, eps: f64) -> usize {
    let mut k = 0;
    let mut e = bound;
    while e >= eps {
        e *= q;
        k += 1;
    }
    k
}

/// Extend a solution `gamma0` valid on the ball of radius `delta` to the box
/// `[-w, w]^m`.
///
/// `v = f - gamma0(A .) + gamma0` is set to 0 on the split-norm ball of
/// radius `delta / 2`, split as `v_plus + v_minus`, and
/// `g = gamma0 - sum_{k<k0+} v_plus(A^k x) + sum_{1<=k<=k0-} v_minus(A^-k x)`.
pub fn globalize(
    gamma0: ScalarFn,
    f: ScalarFn,
    split: &HyperbolicSplitting,
    delta: f64,
    half_width: f64,
    tau: &ScalarCutoff,
) -> Result<GlobalSolution> {
    let m = split.dim();
    let points = ball_samples(m, 0.999 * delta, LOCAL_CHECK_SAMPLES, 0x910b);
    let stats = residual_stats(split, &gamma0, &f, &points);
    if !(stats.max_residual <= LOCAL_RESIDUAL_LIMIT) {
        return Err(Error::LocalResidualTooLarge {
            residual: stats.max_residual,
            limit: LOCAL_RESIDUAL_LIMIT,
            point: stats.worst_point,
        });
    }

    let vanishing_radius = 0.5 * delta;
    let shared = Arc::new(split.clone());
    let v: ScalarFn = {
        let s = shared.clone();
        let gamma0 = gamma0.clone();
        let f = f.clone();
        Arc::new(move |x: &[f64]| {
            if s.split_norm(x) < vanishing_radius {
                return 0.0;
            }
            f(x) - gamma0(&s.apply(x)) + gamma0(x)
        })
    };
    let h_minus = SubspaceBlid::with_bound(*tau, vanishing_radius, BOUND_FRACTION)?;
    let epsilon = h_minus.identity_radius();
    let (v_plus, v_minus) = vanishing_split(v, split, &h_minus, vanishing_radius)?;

    let vertices = box_vertices(m, half_width);
    let q = split.q();
    let m_plus = vertices.iter().map(|x| split.adapted_norm_plus(x)).fold(0.0, f64::max);
    let m_minus = vertices.iter().map(|x| split.adapted_norm_minus(x)).fold(0.0, f64::max);
    let k0_plus = strip_entry(q, m_plus, epsilon);
    let k0_minus = strip_entry(q, m_minus, epsilon);

    let s = shared;
    let g: ScalarFn = Arc::new(move |x: &[f64]| {
        let mut total = gamma0(x);
        let mut y = x.to_vec();
        for _ in 0..k0_plus {
            total -= v_plus(&y);
            y = s.apply(&y);
        }
        let mut y = x.to_vec();
        for _ in 0..k0_minus {
            y = s.apply_inverse(&y);
            total += v_minus(&y);
        }
        total
    });
    Ok(GlobalSolution {
        g,
        k0_plus,
        k0_minus,
        epsilon,
        vanishing_radius,
        half_width,
    })
}

/// Bound `ceil(log(diam / eps) / |log q|) + 1` on the number of terms.
pub fn k0_bound(diam: f64, eps: f64, q: f64) -> usize {
    ((diam / eps).ln() / q.ln().abs()).ceil().max(0.0) as usize + 1
}
