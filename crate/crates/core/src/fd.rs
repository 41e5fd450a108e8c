//! Central finite differences with Richardson extrapolation.
//!
//! The `n`-th central difference
//!
//! ```text
//! D_h f(x) = h^-n * sum_{k=0..n} (-1)^k C(n,k) f(x + (n/2 - k) h)
//! ```
//!
//! has an error expansion in even powers of `h`, so halving the step and
//! eliminating `h^2, h^4, ...` in a Neville tableau gives high-order accuracy.
//! For a polynomial of degree `<= n + 1` along the line the raw difference is
//! already exact.

/// Richardson levels used by [`derivative`] callers that do not care.
pub const DEFAULT_LEVELS: usize = 4;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Plain `order`-th central difference of `f` at `x` with step `h`.
pub fn central_difference<F>(f: &F, x: f64, order: usize, h: f64) -> f64
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if order == 0 {
        return f(x);
    }
    let half = order as f64 / 2.0;
    let mut acc = 0.0;
    for k in 0..=order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(order, k) * f(x + (half - k as f64) * h);
    }
    acc / h.powi(order as i32)
}

/// `order`-th derivative of `f` at `x`, starting from step `h` and halving it
/// `levels - 1` times. Returns the most extrapolated tableau entry.
pub fn derivative<F>(f: &F, x: f64, order: usize, h: f64, levels: usize) -> f64
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if order == 0 {
        return f(x);
    }
    let levels = levels.max(1);
    let mut prev: Vec<f64> = Vec::with_capacity(levels);
    let mut step = h;
    for i in 0..levels {
        let mut row = Vec::with_capacity(i + 1);
        row.push(central_difference(f, x, order, step));
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        prev = row;
        step *= 0.5;
    }
    prev[levels - 1]
}

/// As [`derivative`], but stops extrapolating once the change between two
/// diagonal tableau entries is within the roundoff bound of the finer step;
/// the coarser entry is then returned.
pub fn derivative_auto<F>(f: &F, x: f64, order: usize, h: f64, levels: usize) -> f64
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if order == 0 {
        return f(x);
    }
    let scale = std::cell::Cell::new(0.0f64);
    let g = |s: f64| {
        let v = f(s);
        scale.set(scale.get().max(v.abs()));
        v
    };
    let weight = 2f64.powi(order as i32);
    let levels = levels.max(1);
    let mut prev: Vec<f64> = Vec::with_capacity(levels);
    let mut step = h;
    for i in 0..levels {
        let mut row = Vec::with_capacity(i + 1);
        row.push(central_difference(&g, x, order, step));
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        if i > 0 {
            let noise = 8.0 * f64::EPSILON * scale.get() * weight / step.powi(order as i32);
            if (row[i] - prev[i - 1]).abs() <= noise {
                return prev[i - 1];
            }
        }
        prev = row;
        step *= 0.5;
    }
    prev[levels - 1]
}

/// Half-width of the stencil used by [`derivative`] relative to `h`.
pub fn stencil_half_width(order: usize) -> f64 {
    order as f64 / 2.0
}

/// `order`-th directional derivative `d^n/ds^n f(x + s d)` at `s = 0`.
pub fn directional_derivative<F>(
    f: &F,
    x: &[f64],
    dir: &[f64],
    order: usize,
    h: f64,
    levels: usize,
) -> f64
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let line = |s: f64| {
        let p: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + s * di).collect();
        f(&p)
    };
    derivative(&line, 0.0, order, h, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_low_degree_polynomials() {
        let p = |x: f64| 3.0 * x.powi(4) - 2.0 * x.powi(3) + x - 5.0;
        // fourth difference of a quartic is exact at any step
        let d4 = central_difference(&p, 0.7, 4, 0.3);
        assert!((d4 - 72.0).abs() < 1e-9);
        let d1 = derivative(&p, 0.5, 1, 0.1, 3);
        let exact = 12.0 * 0.125 - 6.0 * 0.25 + 1.0;
        assert!((d1 - exact).abs() < 1e-12);
    }

    #[test]
    fn auto_levels() {
        // quartic plus a large constant: the widest step is exact, finer ones only add noise
        let p = |x: f64| 1.0 + 0.5 * x.powi(4) - x.powi(3);
        let d4 = derivative_auto(&p, 0.0, 4, 0.004, 4);
        assert!((d4 - 12.0).abs() < 1e-3, "{d4}");
        let d1 = derivative_auto(&f64::sin, 0.3, 1, 0.2, 5);
        assert!((d1 - 0.3f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn richardson_on_transcendental() {
        for order in 1..=4 {
            let d = derivative(&f64::sin, 0.3, order, 0.2, 5);
            let exact = match order % 4 {
                1 => 0.3f64.cos(),
                2 => -0.3f64.sin(),
                3 => -0.3f64.cos(),
                _ => 0.3f64.sin(),
            };
            assert!((d - exact).abs() < 1e-7, "order {order}: {d} vs {exact}");
        }
    }

    #[test]
    fn directional_matches_partial() {
        let f = |x: &[f64]| x[0] * x[0] * x[1];
        let d = directional_derivative(&f, &[1.0, 2.0], &[1.0, 0.0], 1, 0.1, 3);
        assert!((d - 4.0).abs() < 1e-12);
        let d2 = directional_derivative(&f, &[0.0, 0.0], &[1.0, 1.0], 3, 0.1, 2);
        assert!((d2 - 6.0).abs() < 1e-9);
    }
}
