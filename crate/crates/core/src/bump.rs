//! Smooth cutoffs on the real line and the scalar blid `h(s) = tau(s) s`.
//!
//! The transition uses the exp-glue construction
//!
//! ```text
//! psi(u) = exp(-1/u) for u > 0, 0 otherwise
//! tau(s) = psi(b^2 - s^2) / (psi(b^2 - s^2) + psi(s^2 - a^2))
//! ```
//!
//! which is C-infinity, even, equal to 1 on `[-a, a]` and 0 outside `(-b, b)`.

use serde::{Deserialize, Serialize};

use crate::fd;
use crate::{Error, Result};

/// Highest derivative order served by [`ScalarCutoff::eval`].
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CutoffRepr", into = "CutoffRepr")]
pub struct ScalarCutoff {
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct CutoffRepr {
    inner_radius: f64,
    outer_radius: f64,
}

impl TryFrom<CutoffRepr> for ScalarCutoff {
    type Error = Error;

    fn try_from(r: CutoffRepr) -> Result<Self> {
        make_cutoff(r.inner_radius, r.outer_radius)
    }
}

impl From<ScalarCutoff> for CutoffRepr {
    fn from(c: ScalarCutoff) -> Self {
        CutoffRepr {
            inner_radius: c.a,
            outer_radius: c.b,
        }
    }
}

/// Cutoff equal to 1 on `[-a, a]` and 0 outside `(-b, b)`.
pub fn make_cutoff(a: f64, b: f64) -> Result<ScalarCutoff> {
    if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= a {
        return Err(Error::InvalidRadii { a, b });
    }
    Ok(ScalarCutoff { a, b })
}

/// `k`-th derivative of the cutoff at `s`, `k <= 4`.
pub fn cutoff_eval(tau: &ScalarCutoff, s: f64, order: usize) -> Result<f64> {
    tau.eval(s, order)
}

/// `h(s) = tau(s) * s`: identity on `[-a, a]`, zero outside `(-b, b)`.
pub fn scalar_blid_eval(h: &ScalarCutoff, s: f64) -> f64 {
    h.blid(s)
}

impl ScalarCutoff {
    /// The cutoff used for the integral functional example: `(1/3, 1/2)`.
    pub fn standard() -> Self {
        ScalarCutoff {
            a: 1.0 / 3.0,
            b: 0.5,
        }
    }

    pub fn inner_radius(&self) -> f64 {
        self.a
    }

    pub fn outer_radius(&self) -> f64 {
        self.b
    }

    /// `tau(s)`.
    pub fn value(&self, s: f64) -> f64 {
        let s = s.abs();
        if s <= self.a {
            return 1.0;
        }
        if s >= self.b {
            return 0.0;
        }
        let u = self.b * self.b - s * s;
        let v = s * s - self.a * self.a;
        // tau = 1 / (1 + psi(v) / psi(u)); exp overflow maps cleanly to 0.
        1.0 / (1.0 + (1.0 / u - 1.0 / v).exp())
    }

    /// Closed-form `tau'(s)`.
    pub fn slope(&self, s: f64) -> f64 {
        let abs = s.abs();
        if abs <= self.a || abs >= self.b {
            return 0.0;
        }
        let u = self.b * self.b - s * s;
        let v = s * s - self.a * self.a;
        let t = self.value(s);
        -t * (1.0 - t) * 2.0 * s * (1.0 / (u * u) + 1.0 / (v * v))
    }

    pub fn eval(&self, s: f64, order: usize) -> Result<f64> {
        match order {
            0 => Ok(self.value(s)),
            1 => Ok(self.slope(s)),
            k if k <= MAX_ORDER => {
                let h = (self.b - self.a) / 64.0;
                let slope = |x: f64| self.slope(x);
                Ok(fd::derivative(&slope, s, k - 1, h, fd::DEFAULT_LEVELS))
            }
            k => Err(Error::OrderTooHigh {
                order: k,
                max: MAX_ORDER,
            }),
        }
    }

    pub fn blid(&self, s: f64) -> f64 {
        let t = self.value(s);
        if t == 1.0 {
            s
        } else {
            t * s
        }
    }
}
