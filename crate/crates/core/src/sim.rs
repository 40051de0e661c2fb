//! Seeded simulators used by tests, examples and the synthetic fixture.

use rand::Rng;
use rand_distr::StandardNormal;

const BURN_IN: usize = 200;

pub fn normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// x_t = c + Σ φ_i x_{t-i} + Σ θ_j ε_{t-j} + ε_t with unit-variance shocks, after a burn-in.
pub fn arma<R: Rng + ?Sized>(rng: &mut R, phi: &[f64], theta: &[f64], intercept: f64, n: usize) -> Vec<f64> {
    let total = n + BURN_IN;
    let eps = normals(rng, total);
    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut v = intercept + eps[t];
        for (i, a) in phi.iter().enumerate() {
            if t > i {
                v += a * x[t - 1 - i];
            }
        }
        for (j, b) in theta.iter().enumerate() {
            if t > j {
                v += b * eps[t - 1 - j];
            }
        }
        x[t] = v;
    }
    x.split_off(BURN_IN)
}

pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut level = 0.0;
    normals(rng, n)
        .into_iter()
        .map(|e| {
            level += e;
            level
        })
        .collect()
}
