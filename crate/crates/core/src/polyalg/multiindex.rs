use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Exponent vector `p = (p_1, ..., p_m)` of the monomial `x^p`.
///
/// Ordered graded-lexicographically: lower total degree first, then larger
/// leading exponents first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `x^p`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .fold(1.0, |acc, (&p, &xi)| acc * xi.powi(p as i32))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `binom(m + n - 1, n)`, the number of degree-`n` monomials in `m` variables.
pub fn monomial_count(m: usize, n: usize) -> usize {
    if m == 0 {
        return usize::from(n == 0);
    }
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * (m as u128 + k) / (k + 1);
    }
    c as usize
}

/// All degree-`n` multi-indices in `m` variables, graded-lex order.
pub fn monomials(m: usize, n: usize) -> Vec<MultiIndex> {
    fn rec(m: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == m {
            prefix.push(left);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for p in (0..=left).rev() {
            prefix.push(p);
            rec(m, left - p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(monomial_count(m, n));
    if m == 0 {
        if n == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    rec(m, n as u32, &mut Vec::with_capacity(m), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let b = monomials(2, 2);
        assert_eq!(b, vec![MultiIndex(vec![2, 0]), MultiIndex(vec![1, 1]), MultiIndex(vec![0, 2])]);
        let mut sorted = monomials(3, 3);
        sorted.sort();
        assert_eq!(sorted, monomials(3, 3));
        assert!(MultiIndex(vec![0, 1]) < MultiIndex(vec![2, 0]));
    }

    #[test]
    fn counts_match_enumeration() {
        for m in 1..=6 {
            for n in 0..=6 {
                assert_eq!(monomials(m, n).len(), monomial_count(m, n));
                assert!(monomials(m, n).iter().all(|p| p.degree() == n && p.dim() == m));
            }
        }
        assert_eq!(monomial_count(3, 4), 15);
    }
}
