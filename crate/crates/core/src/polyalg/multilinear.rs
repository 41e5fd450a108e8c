use std::collections::BTreeMap;

use super::hompoly::HomPolyMap;
use super::factorial;
use crate::{Error, Result};

/// Symmetric `j`-linear map `(R^m)^j -> R^d`, stored on sorted index tuples:
/// `coeff[(i_1 <= ... <= i_j)] = g(e_{i_1}, ..., e_{i_j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMultilinear {
    dim: usize,
    codim: usize,
    order: usize,
    coords: Vec<BTreeMap<Vec<usize>, f64>>,
}

impl SymMultilinear {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `g(e_{i_1}, ..., e_{i_j})` for any (not necessarily sorted) tuple.
    pub fn coeff(&self, coord: usize, indices: &[usize]) -> f64 {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.coords[coord].get(&key).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, args: &[&[f64]]) -> Result<Vec<f64>> {
        if args.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: args.len(),
            });
        }
        if let Some(a) = args.iter().find(|a| a.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: a.len(),
            });
        }
        Ok(self.eval_unchecked(args))
    }

    /// Full expansion `sum_{i in [m]^j} g_i prod_k args[k][i_k]`.
    pub(crate) fn eval_unchecked(&self, args: &[&[f64]]) -> Vec<f64> {
        let j = self.order;
        let m = self.dim;
        let mut out = vec![0.0; self.codim];
        if j == 0 {
            for (c, o) in out.iter_mut().enumerate() {
                *o = self.coeff(c, &[]);
            }
            return out;
        }
        let mut idx = vec![0usize; j];
        let mut key = vec![0usize; j];
        loop {
            let w: f64 = idx.iter().enumerate().map(|(k, &i)| args[k][i]).product();
            if w != 0.0 {
                key.copy_from_slice(&idx);
                key.sort_unstable();
                for (c, o) in out.iter_mut().enumerate() {
                    if let Some(g) = self.coords[c].get(&key) {
                        *o += g * w;
                    }
                }
            }
            // odometer
            let mut k = 0;
            while k < j {
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == j {
                break;
            }
        }
        out
    }
}

fn sorted_tuples(m: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, j: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(m, j, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, j, 0, &mut Vec::with_capacity(j), &mut out);
    out
}

/// The unique symmetric `j`-linear form with `g(x, ..., x) = P(x)`, from the
/// polarization identity
///
/// ```text
/// g(v_1, ..., v_j) = 1 / (2^j j!) * sum_{s in {+1,-1}^j} s_1 ... s_j P(s_1 v_1 + ... + s_j v_j)
/// ```
///
/// evaluated on basis vectors.
pub fn polarize(p: &HomPolyMap) -> SymMultilinear {
    let m = p.dim();
    let j = p.degree();
    let d = p.codim();
    let mut coords = vec![BTreeMap::new(); d];
    if j == 0 {
        let v = p.eval_unchecked(&vec![0.0; m]);
        for (c, val) in v.into_iter().enumerate() {
            coords[c].insert(Vec::new(), val);
        }
        return SymMultilinear {
            dim: m,
            codim: d,
            order: 0,
            coords,
        };
    }
    let norm = 1.0 / (2f64.powi(j as i32) * factorial(j));
    let mut point = vec![0.0; m];
    for tuple in sorted_tuples(m, j) {
        let mut acc = vec![0.0; d];
        for mask in 0u32..(1 << j) {
            point.iter_mut().for_each(|v| *v = 0.0);
            let mut sign = 1.0;
            for (k, &i) in tuple.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    point[i] -= 1.0;
                    sign = -sign;
                } else {
                    point[i] += 1.0;
                }
            }
            for (a, v) in acc.iter_mut().zip(p.eval_unchecked(&point)) {
                *a += sign * v;
            }
        }
        for (c, a) in acc.into_iter().enumerate() {
            let g = a * norm;
            if g != 0.0 {
                coords[c].insert(tuple.clone(), g);
            }
        }
    }
    SymMultilinear {
        dim: m,
        codim: d,
        order: j,
        coords,
    }
}
