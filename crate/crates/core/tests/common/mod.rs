//! Fields and configurations shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use youngwave::grid::{forward_transform, inverse_transform, BoxGrid, Field};

/// Smooth bump `e * exp(-1/(1 - |x|^2/r^2))` of height one and radius `r`.
pub fn bump(grid: BoxGrid, radius: f64, height: f64) -> Field {
    Field::from_fn(grid, |p| {
        let r2 = (p[0] * p[0] + p[1] * p[1]) / (radius * radius);
        if r2 < 1.0 {
            height * (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

pub fn gaussian(grid: BoxGrid, sigma: f64) -> Field {
    Field::from_fn(grid, |p| (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * sigma * sigma)).exp())
}

/// Random trigonometric polynomial with wavenumbers up to `kmax` (per axis),
/// multiplied by a bump of radius `radius`.
pub fn random_smooth_field(grid: BoxGrid, seed: u64, kmax: i64, radius: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dxi = grid.frequency_spacing();
    let ky_max = if grid.dim() == 1 { 0 } else { kmax };
    let mut modes = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -ky_max..=ky_max {
            let a: f64 = rng.sample(StandardNormal);
            let ph: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            modes.push((k1 as f64 * dxi, k2 as f64 * dxi, a, ph));
        }
    }
    let env = bump(grid, radius, 1.0);
    let f = Field::from_fn(grid, |p| {
        modes.iter().map(|(b1, b2, a, ph)| a * (b1 * p[0] + b2 * p[1] + ph).cos()).sum()
    });
    f.pointwise(&env).unwrap()
}

/// Rough field with spectral amplitude `|xi|^{-(d/2 + alpha)}` (white noise
/// filtered), localized by a bump envelope of radius `radius`.
pub fn rough_field(grid: BoxGrid, seed: u64, alpha: f64, radius: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
    let white = Field::new(grid, white).unwrap();
    let power = -(grid.dim() as f64 / 2.0 + alpha);
    let shaped = forward_transform(&white).apply_multiplier(|i| {
        let xi = grid.frequency_norm(i);
        if xi == 0.0 || grid.is_nyquist(i) {
            0.0
        } else {
            xi.powf(power)
        }
    });
    let f = inverse_transform(&shaped).unwrap();
    f.pointwise(&bump(grid, radius, 1.0)).unwrap()
}

/// `int_{lo}^{hi} exp(-x^2/(2 sigma^2)) dx`.
pub fn gaussian_integral(lo: f64, hi: f64, sigma: f64) -> f64 {
    use statrs::function::erf::erf;
    let s = sigma * std::f64::consts::SQRT_2;
    sigma * (std::f64::consts::PI / 2.0).sqrt() * (erf(hi / s) - erf(lo / s))
}
