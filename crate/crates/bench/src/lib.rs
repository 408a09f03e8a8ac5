//! Synthetic workloads shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two isotropic Gaussian blobs centred at `±offset` on every axis, labels ±1.
pub fn gaussian_blobs(m: usize, n: usize, offset: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for i in 0..m {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = (0..n).map(|_| y * offset + normal(&mut rng)).collect();
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

/// Box-Muller; one draw per call keeps the stream easy to reason about.
fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
