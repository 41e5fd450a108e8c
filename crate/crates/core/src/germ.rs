//! Extension of local maps to global ones and Borel realization of jets.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bump::ScalarCutoff;
use crate::fd;
use crate::funcspace::{euclidean_norm, Blid, NormedSpace, RescaledBlid};
use crate::polyalg::{continuity_bound, derivative_polynomial, HomPolyMap};
use crate::{Error, Result};

/// Highest order served by [`jet_extract`].
pub const MAX_JET_ORDER: usize = 5;
/// Default step scale when a map declares no local radius.
const DEFAULT_LOCAL_RADIUS: f64 = 0.1;

pub type Evaluator<V> = Arc<dyn Fn(&V) -> Vec<f64> + Send + Sync>;

/// A map known only on the closed ball of radius `validity_radius`.
#[derive(Clone)]
pub struct LocalMap<V> {
    eval: Evaluator<V>,
    validity_radius: f64,
    sup_bound: Option<f64>,
}

impl<V> fmt::Debug for LocalMap<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalMap")
            .field("validity_radius", &self.validity_radius)
            .field("sup_bound", &self.sup_bound)
            .finish_non_exhaustive()
    }
}

impl<V: NormedSpace + 'static> LocalMap<V> {
    pub fn new(validity_radius: f64, f: impl Fn(&V) -> Vec<f64> + Send + Sync + 'static) -> Result<Self> {
        if !(validity_radius > 0.0 && validity_radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "validity radius must be positive and finite, got {validity_radius}"
            )));
        }
        Ok(LocalMap {
            eval: Arc::new(f),
            validity_radius,
            sup_bound: None,
        })
    }

    /// Declare `sup |f|` over the validity ball.
    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn eval(&self, x: &V) -> Result<Vec<f64>> {
        let norm = x.norm();
        if norm > self.validity_radius * (1.0 + 1e-12) {
            return Err(Error::OutsideValidity {
                norm,
                radius: self.validity_radius,
            });
        }
        Ok((self.eval)(x))
    }
}

/// A map defined on the whole space.
#[derive(Clone)]
pub struct GlobalMap<V> {
    eval: Evaluator<V>,
    sup_bound: Option<f64>,
    local_radius: Option<f64>,
}

impl<V> fmt::Debug for GlobalMap<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GlobalMap")
            .field("sup_bound", &self.sup_bound)
            .field("local_radius", &self.local_radius)
            .finish_non_exhaustive()
    }
}

impl<V: 'static> GlobalMap<V> {
    pub fn new(f: impl Fn(&V) -> Vec<f64> + Send + Sync + 'static) -> Self {
        GlobalMap {
            eval: Arc::new(f),
            sup_bound: None,
            local_radius: None,
        }
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    /// Radius of the ball around 0 on which the map equals its local formula.
    pub fn with_local_radius(mut self, radius: f64) -> Self {
        self.local_radius = Some(radius);
        self
    }

    pub fn eval(&self, x: &V) -> Vec<f64> {
        (self.eval)(x)
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn local_radius(&self) -> Option<f64> {
        self.local_radius
    }
}

impl GlobalMap<Vec<f64>> {
    pub fn eval_slice(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(&x.to_vec())
    }
}

/// `F(x) = delta(x) f(x)` with the bump `delta(x) = tau(|x|^2)` on `R^m`,
/// and `F = 0` where `delta` vanishes.
pub fn extend_by_bump(f: &LocalMap<Vec<f64>>, tau: &ScalarCutoff) -> Result<GlobalMap<Vec<f64>>> {
    let support = tau.outer_radius().sqrt();
    if support >= f.validity_radius {
        return Err(Error::SupportExceedsValidity {
            support,
            validity: f.validity_radius,
        });
    }
    let inner = f.eval.clone();
    let tau = *tau;
    let out_dim = std::sync::OnceLock::<usize>::new();
    let global = GlobalMap::new(move |x: &Vec<f64>| {
        let delta = tau.value(x.iter().map(|v| v * v).sum());
        if delta == 1.0 {
            return inner(x);
        }
        if delta == 0.0 {
            let d = *out_dim.get_or_init(|| inner(&vec![0.0; x.len()]).len());
            return vec![0.0; d];
        }
        inner(x).into_iter().map(|v| delta * v).collect()
    })
    .with_local_radius(tau.inner_radius().sqrt());
    Ok(match f.sup_bound {
        Some(b) => global.with_sup_bound(b),
        None => global,
    })
}

/// `F(x) = f(H_1(x))` with `H_1(x) = (eps / N) H((N / eps) x)`: a global map
/// equal to `f` on the ball of radius `eps n / N`.
pub fn extend_germ<V, B>(f: &LocalMap<V>, h: B) -> Result<GlobalMap<V>>
where
    V: NormedSpace + 'static,
    B: Blid<V> + 'static,
{
    let eps = f.validity_radius;
    let h1 = RescaledBlid::new(h, eps)?;
    let agree = h1.identity_radius();
    let inner = f.eval.clone();
    let global = GlobalMap::new(move |x: &V| {
        let y = h1.apply(x);
        debug_assert!(y.norm() <= eps * (1.0 + 1e-12));
        inner(&y)
    })
    .with_local_radius(agree);
    Ok(match f.sup_bound {
        Some(b) => global.with_sup_bound(b),
        None => global,
    })
}

// ---------------------------------------------------------------------------
// Jets

/// Truncated jet `P_0, ..., P_J` with `P_j = f^(j)(0)(x)^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetRepr", into = "JetRepr")]
pub struct JetSpec {
    dim: usize,
    polys: Vec<HomPolyMap>,
}

#[derive(Serialize, Deserialize)]
struct JetRepr {
    dim: usize,
    #[serde(rename = "J")]
    truncation: usize,
    polys: Vec<HomPolyMap>,
}

impl TryFrom<JetRepr> for JetSpec {
    type Error = Error;

    fn try_from(r: JetRepr) -> Result<Self> {
        if r.polys.len() != r.truncation + 1 {
            return Err(Error::InvalidInput(format!(
                "J = {} needs {} polynomials, got {}",
                r.truncation,
                r.truncation + 1,
                r.polys.len()
            )));
        }
        JetSpec::new(r.dim, r.polys)
    }
}

impl From<JetSpec> for JetRepr {
    fn from(j: JetSpec) -> Self {
        JetRepr {
            dim: j.dim,
            truncation: j.truncation(),
            polys: j.polys,
        }
    }
}

impl JetSpec {
    pub fn new(dim: usize, polys: Vec<HomPolyMap>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::InvalidInput("a jet needs at least P_0".into()));
        }
        let codim = polys[0].codim();
        for (j, p) in polys.iter().enumerate() {
            if p.degree() != j {
                return Err(Error::InvalidInput(format!("P_{j} has degree {}", p.degree())));
            }
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if p.codim() != codim {
                return Err(Error::DimensionMismatch {
                    expected: codim,
                    got: p.codim(),
                });
            }
        }
        Ok(JetSpec { dim, polys })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.polys[0].codim()
    }

    pub fn truncation(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[HomPolyMap] {
        &self.polys
    }
}

/// Output of [`realize_jet`].
#[derive(Debug, Clone)]
pub struct RealizedJet {
    pub map: GlobalMap<Vec<f64>>,
    /// Scales `eps_j` of the blids `H_j(x) = eps_j H(x / eps_j)`.
    pub eps: Vec<f64>,
    /// `sup |P_j(H_j(x))| / j!` for each summand.
    pub summand_bounds: Vec<f64>,
    /// The realized map equals `sum_j P_j(x) / j!` on this ball.
    pub identity_radius: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Scale rule for the `j`-th summand: with `c_n = cb(P_j^(n)) / j!` and
/// `n* = argmax_{n < j} c_n`, take
/// `eps_j = min(1, (2^-j / (1 + c_{n*}))^(1 / (j - n*)))`.
pub fn jet_scale(p: &HomPolyMap) -> f64 {
    let j = p.degree();
    if j == 0 {
        return 1.0;
    }
    let jf = factorial(j);
    let (n_star, c_star) = (0..j)
        .map(|n| (n, continuity_bound(&derivative_polynomial(p, n)) / jf))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let base = 2f64.powi(-(j as i32)) / (1.0 + c_star);
    base.powf(1.0 / (j - n_star) as f64).min(1.0)
}

/// `f(x) = sum_{j <= J} P_j(H_j(x)) / j!` with `H(x) = tau(|x|^2) x` on `R^m`.
///
/// Each summand has all derivatives at 0 equal to zero except the `j`-th,
/// which is `P_j`; the sum is bounded by the sum of `summand_bounds`.
pub fn realize_jet(jet: &JetSpec, tau: &ScalarCutoff) -> Result<RealizedJet> {
    if jet.dim > 3 || jet.truncation() > 5 {
        return Err(Error::CapExceeded {
            what: if jet.dim > 3 { "jet dimension" } else { "jet truncation" },
            value: if jet.dim > 3 { jet.dim } else { jet.truncation() },
            cap: if jet.dim > 3 { 3 } else { 5 },
        });
    }
    let eps: Vec<f64> = jet.polys.iter().map(jet_scale).collect();
    let a = tau.inner_radius();
    let sup_h = tau.outer_radius().sqrt();
    let summand_bounds: Vec<f64> = jet
        .polys
        .iter()
        .zip(&eps)
        .map(|(p, &e)| {
            let j = p.degree();
            continuity_bound(p) * (e * sup_h).powi(j as i32) / factorial(j)
        })
        .collect();
    let identity_radius = eps[1..]
        .iter()
        .map(|e| e * a.sqrt())
        .fold(f64::INFINITY, f64::min);
    let identity_radius = if identity_radius.is_finite() { identity_radius } else { a.sqrt() };

    let polys = jet.polys.clone();
    let eps_eval = eps.clone();
    let tau = *tau;
    let codim = jet.codim();
    let map = GlobalMap::new(move |x: &Vec<f64>| {
        let mut out = vec![0.0; codim];
        for (p, &e) in polys.iter().zip(&eps_eval) {
            let j = p.degree();
            let w = if j == 0 {
                polys[0].eval_unchecked(x)
            } else {
                let r2 = x.iter().map(|v| v * v).sum::<f64>() / (e * e);
                let t = tau.value(r2);
                if t == 0.0 {
                    continue;
                }
                if t == 1.0 {
                    p.eval_unchecked(x)
                } else {
                    let hx: Vec<f64> = x.iter().map(|v| t * v).collect();
                    p.eval_unchecked(&hx)
                }
            };
            let inv = 1.0 / factorial(j);
            for (o, v) in out.iter_mut().zip(w) {
                *o += inv * v;
            }
        }
        out
    })
    .with_sup_bound(summand_bounds.iter().sum())
    .with_local_radius(identity_radius);
    Ok(RealizedJet {
        map,
        eps,
        summand_bounds,
        identity_radius,
    })
}

/// `d^n/ds^n F(s dir)` at `s = 0` by central differences with Richardson
/// extrapolation; the stencil stays inside the map's declared local radius
/// and extrapolation stops once roundoff dominates.
pub fn jet_extract(f: &GlobalMap<Vec<f64>>, dir: &[f64], n: usize) -> Result<Vec<f64>> {
    if n > MAX_JET_ORDER {
        return Err(Error::OrderTooHigh {
            order: n,
            max: MAX_JET_ORDER,
        });
    }
    let origin = vec![0.0; dir.len()];
    let value0 = f.eval(&origin);
    if n == 0 {
        return Ok(value0);
    }
    let dn = euclidean_norm(dir);
    if dn == 0.0 {
        return Ok(vec![0.0; value0.len()]);
    }
    let radius = f.local_radius.unwrap_or(DEFAULT_LOCAL_RADIUS) / dn;
    let h = 0.9 * radius / fd::stencil_half_width(n);
    let out = (0..value0.len())
        .map(|c| {
            let line = |s: f64| {
                let p: Vec<f64> = dir.iter().map(|d| s * d).collect();
                f.eval(&p)[c]
            };
            fd::derivative_auto(&line, 0.0, n, h, fd::DEFAULT_LEVELS)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::make_cutoff;
    use crate::funcspace::{integral_functional, BallBlid, C01Blid, GridFunction};
    use crate::rng;
    use rand::Rng;

    fn h() -> ScalarCutoff {
        make_cutoff(1.0 / 3.0, 0.5).unwrap()
    }

    #[test]
    fn local_map_guards_its_ball() {
        let f = LocalMap::new(1.0, |x: &Vec<f64>| vec![x[0]]).unwrap();
        assert!(f.eval(&vec![0.5, 0.5]).is_ok());
        assert!(matches!(f.eval(&vec![1.0, 1.0]), Err(Error::OutsideValidity { .. })));
        assert!(LocalMap::new(0.0, |x: &Vec<f64>| x.clone()).is_err());
    }

    #[test]
    fn bump_extension() {
        let f = LocalMap::new(1.0, |x: &Vec<f64>| vec![1.0 + x[0] * x[1]]).unwrap();
        let tau = make_cutoff(0.25, 0.64).unwrap();
        let big = extend_by_bump(&f, &h()).unwrap();
        assert_eq!(big.eval(&vec![0.0, 0.0]), vec![1.0]);
        assert_eq!(big.eval(&vec![3.0, 0.0]), vec![0.0]);
        let g = extend_by_bump(&f, &tau).unwrap();
        let mut r = rng::seeded(2);
        for _ in 0..200 {
            let x = rng::in_ball(&mut r, 2, 0.5);
            assert_eq!(g.eval(&x), f.eval(&x).unwrap());
        }
        let wide = make_cutoff(0.5, 1.0).unwrap();
        assert!(matches!(extend_by_bump(&f, &wide), Err(Error::SupportExceedsValidity { .. })));
    }

    #[test]
    fn germ_extension_on_rn() {
        let f = LocalMap::new(1.0, |x: &Vec<f64>| vec![x.iter().map(|v| v * v).sum()])
            .unwrap()
            .with_sup_bound(1.0);
        let blid = BallBlid::new(h());
        let agree = 1.0 * blid.identity_radius() / blid.bound();
        let big = extend_germ(&f, blid).unwrap();
        let mut r = rng::seeded(12);
        for _ in 0..300 {
            let x = rng::in_ball(&mut r, 2, agree * 0.999);
            assert_eq!(big.eval(&x), f.eval(&x).unwrap());
        }
        for radius in [1.0, 2.0, 10.0, 100.0] {
            for _ in 0..50 {
                let x: Vec<f64> = rng::unit_vec(&mut r, 2).iter().map(|v| v * radius).collect();
                assert!(big.eval(&x)[0] <= 1.0 + 1e-12);
            }
        }
        let c = LocalMap::new(0.3, |_: &Vec<f64>| vec![4.2]).unwrap();
        let cc = extend_germ(&c, BallBlid::new(h())).unwrap();
        assert_eq!(cc.eval(&vec![50.0, -3.0]), vec![4.2]);
    }

    #[test]
    fn germ_extension_on_grid_functions() {
        let hc = h();
        let f = LocalMap::new(0.5, move |x: &GridFunction| {
            vec![integral_functional(x, false, &hc).expect("inside the ball")]
        })
        .unwrap();
        let big = extend_germ(&f, C01Blid { cutoff: h() }).unwrap();
        let x = GridFunction::from_fn(100, |t| 0.3 * (5.0 * t).cos()).unwrap();
        assert_eq!(big.eval(&x), f.eval(&x).unwrap());
        let ten = GridFunction::constant(100, 10.0).unwrap();
        assert_eq!(big.eval(&ten), vec![1.0]);
    }

    fn scalar_jet(polys: Vec<HomPolyMap>) -> JetSpec {
        let dim = polys[0].dim();
        JetSpec::new(dim, polys).unwrap()
    }

    #[test]
    fn jet_validation_and_json() {
        let p0 = HomPolyMap::scalar(2, 0, &[(&[0, 0], 1.5)]).unwrap();
        let p1 = HomPolyMap::scalar(2, 1, &[(&[1, 0], 1.0)]).unwrap();
        assert!(JetSpec::new(2, vec![p1.clone()]).is_err());
        let jet = scalar_jet(vec![p0, p1]);
        let json = serde_json::to_value(&jet).unwrap();
        assert_eq!(json["J"], 1);
        let back: JetSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, jet);
    }

    #[test]
    fn constant_jet() {
        let p0 = HomPolyMap::scalar(2, 0, &[(&[0, 0], 2.5)]).unwrap();
        let rj = realize_jet(&scalar_jet(vec![p0]), &h()).unwrap();
        for x in [[0.0, 0.0], [1.0, -4.0], [100.0, 0.0]] {
            assert_eq!(rj.map.eval(&x.to_vec()), vec![2.5]);
        }
    }

    #[test]
    fn linear_jet() {
        let p0 = HomPolyMap::zero(2, 1, 0).unwrap();
        let p1 = HomPolyMap::scalar(2, 1, &[(&[1, 0], 1.0)]).unwrap();
        let rj = realize_jet(&scalar_jet(vec![p0, p1]), &h()).unwrap();
        let d = jet_extract(&rj.map, &[1.0, 0.0], 1).unwrap()[0];
        // independent one-sided-free oracle: symmetric quotient inside the identity ball
        let s = rj.identity_radius * 0.5;
        let oracle = (rj.map.eval(&vec![s, 0.0])[0] - rj.map.eval(&vec![-s, 0.0])[0]) / (2.0 * s);
        assert!((d - 1.0).abs() < 1e-10 && (oracle - 1.0).abs() < 1e-12);
        assert!(jet_extract(&rj.map, &[0.0, 1.0], 1).unwrap()[0].abs() < 1e-10);
    }

    #[test]
    fn single_summand_has_one_nonzero_derivative() {
        let mut r = rng::seeded(21);
        for j in 1..=4 {
            let mut polys: Vec<HomPolyMap> = (0..=4).map(|k| HomPolyMap::zero(2, 1, k).unwrap()).collect();
            polys[j] = HomPolyMap::random(&mut r, 2, 1, j, 1.0).unwrap();
            let rj = realize_jet(&scalar_jet(polys.clone()), &h()).unwrap();
            let dir = rng::unit_vec(&mut r, 2);
            for n in 0..=5 {
                let d = jet_extract(&rj.map, &dir, n).unwrap()[0];
                if n == j {
                    let want = polys[j].eval_scalar(&dir);
                    assert!((d - want).abs() < 1e-6 * want.abs().max(1.0), "j {j} n {n}: {d} vs {want}");
                } else {
                    assert!(d.abs() < 1e-6, "j {j} n {n}: {d}");
                }
            }
        }
    }

    #[test]
    fn realized_jet_is_bounded() {
        let mut r = rng::seeded(22);
        let polys: Vec<HomPolyMap> = (0..=4).map(|k| HomPolyMap::random(&mut r, 2, 1, k, 1.0).unwrap()).collect();
        let rj = realize_jet(&scalar_jet(polys), &h()).unwrap();
        let bound = rj.map.sup_bound().unwrap();
        for _ in 0..2000 {
            let scale = r.gen_range(0.0..2.0);
            let x: Vec<f64> = rng::uniform_vec(&mut r, 2, scale);
            assert!(rj.map.eval(&x)[0].abs() <= bound + 1e-12);
        }
        assert!(rj.eps.iter().all(|&e| e > 0.0 && e <= 1.0));
    }

    #[test]
    fn extract_examples() {
        let sq = GlobalMap::new(|x: &Vec<f64>| vec![x[0] * x[0]]);
        assert!((jet_extract(&sq, &[1.0, 0.0], 2).unwrap()[0] - 2.0).abs() < 1e-10);
        assert!(jet_extract(&sq, &[1.0, 0.0], 1).unwrap()[0].abs() < 1e-12);
        assert!(matches!(jet_extract(&sq, &[1.0, 0.0], 6), Err(Error::OrderTooHigh { .. })));
    }
}
