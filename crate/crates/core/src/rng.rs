//! Seeded sampling helpers.
//!
//! All randomized checks use `ChaCha8Rng::seed_from_u64(seed)` so that a fixed
//! seed reproduces the same samples on every platform.

use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng as SampleRng;

pub fn seeded(seed: u64) -> SampleRng {
    SampleRng::seed_from_u64(seed)
}

/// Vector with entries uniform in `[-scale, scale]`.
pub fn uniform_vec<R: Rng>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-scale..=scale)).collect()
}

/// Euclidean unit vector with a uniformly random direction.
pub fn unit_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v = uniform_vec(rng, len, 1.0);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Point uniformly distributed in the Euclidean ball of the given radius.
pub fn in_ball<R: Rng>(rng: &mut R, len: usize, radius: f64) -> Vec<f64> {
    let dir = unit_vec(rng, len);
    let r = radius * rng.gen::<f64>().powf(1.0 / len as f64);
    dir.into_iter().map(|x| x * r).collect()
}
