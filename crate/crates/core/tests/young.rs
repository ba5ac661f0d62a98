//! Riemann sums of the Young integral against closed forms and each other.

mod common;

use common::bump;
use youngwave::besov::{Mollifier, PathSpaceSpec, DEFAULT_MOMENT_ORDER};
use youngwave::grid::{forward_transform, inverse_transform, product, BoxGrid, Field};
use youngwave::noise::{NoiseConfig, NoisePath, SpectralMeasure};
use youngwave::young::{
    cauchy_report, riemann_sum, riemann_sums_at, young_integral, DyadicPartition, ProcessPath, YoungOptions,
};

fn grid() -> BoxGrid {
    BoxGrid::new(1, 256, 8.0).unwrap()
}

fn noise(level: u32, seed: u64) -> NoisePath {
    let times = DyadicPartition::new(1.0, level).unwrap().points();
    let c = NoiseConfig {
        a0: 0.3,
        measure: SpectralMeasure::RadialRiesz { exponent: 0.5 },
        level: 3,
        seed,
        grid: grid(),
        times,
    };
    NoisePath::sample(&c).unwrap()
}

/// A smooth integrand: a bump modulated in time.
fn integrand(level: u32) -> ProcessPath {
    let b = bump(grid(), 3.0, 1.0);
    ProcessPath::from_fn(DyadicPartition::new(1.0, level).unwrap(), |t| Ok(b.scaled(1.0 + t))).unwrap()
}

/// Deterministic surrogate `W_t = t g`.
fn linear_noise(level: u32, g: &Field) -> NoisePath {
    let times = DyadicPartition::new(1.0, level).unwrap().points();
    let slices = times.iter().map(|t| g.scaled(*t)).collect();
    NoisePath::from_slices(times, slices).unwrap()
}

fn close(a: &Field, b: &Field, tol: f64) -> bool {
    a.try_sub(b).unwrap().max_abs() <= tol * b.max_abs().max(1.0)
}

#[test]
fn fast_and_direct_sums_agree() {
    let u = integrand(6);
    let w = noise(6, 1);
    let eval = [0.0, 0.25, 0.3, 0.5, 0.9, 1.0];
    for n in [2, 4, 6] {
        let fast = riemann_sums_at(&u, &w, n, &eval).unwrap();
        for (t, f) in eval.iter().zip(&fast) {
            assert!(close(f, &riemann_sum(&u, &w, n, *t).unwrap(), 1e-10), "n={n} t={t}");
        }
    }
}

#[test]
fn sum_is_zero_at_time_zero_and_for_zero_integrand() {
    let w = noise(5, 2);
    let u = integrand(5);
    assert_eq!(riemann_sum(&u, &w, 5, 0.0).unwrap().max_abs(), 0.0);
    let z = ProcessPath::zeros(*u.partition(), grid());
    assert_eq!(riemann_sum(&z, &w, 5, 1.0).unwrap().max_abs(), 0.0);
}

#[test]
fn sum_is_bilinear() {
    let u = integrand(5);
    let v = ProcessPath::from_fn(*u.partition(), |t| Ok(bump(grid(), 2.0, t * t))).unwrap();
    let (w1, w2) = (noise(5, 3), noise(5, 4));
    let t = 0.75;
    let lhs = riemann_sum(&u.scaled(2.0).try_add(&v).unwrap(), &w1, 5, t).unwrap();
    let rhs = riemann_sum(&u, &w1, 5, t).unwrap().scaled(2.0).try_add(&riemann_sum(&v, &w1, 5, t).unwrap()).unwrap();
    assert!(close(&lhs, &rhs, 1e-12));
    let w12 = NoisePath::from_slices(
        w1.times().to_vec(),
        w1.slices().iter().zip(w2.slices()).map(|(a, b)| a.add_scaled(-3.0, b).unwrap()).collect(),
    )
    .unwrap();
    let lhs = riemann_sum(&u, &w12, 5, t).unwrap();
    let rhs = riemann_sum(&u, &w1, 5, t).unwrap().add_scaled(-3.0, &riemann_sum(&u, &w2, 5, t).unwrap()).unwrap();
    assert!(close(&lhs, &rhs, 1e-12));
}

#[test]
fn constant_noise_gives_zero() {
    let u = integrand(4);
    let g = bump(grid(), 1.0, 1.0);
    let times = DyadicPartition::new(1.0, 4).unwrap().points();
    // Zero increments: W_t = 0 for every t.
    let flat = NoisePath::from_slices(times.clone(), vec![Field::zeros(grid()); times.len()]).unwrap();
    assert_eq!(riemann_sum(&u, &flat, 4, 1.0).unwrap().max_abs(), 0.0);
    assert!(riemann_sum(&u, &linear_noise(4, &g), 4, 1.0).unwrap().max_abs() > 0.0);
}

#[test]
fn shorter_horizon_matches_restriction() {
    // On [0, 1/2] with the same points, the sums agree with those on [0, 1].
    let full_u = integrand(6);
    let full_w = noise(6, 5);
    let half = DyadicPartition::new(0.5, 5).unwrap();
    let half_u = ProcessPath::new(half, full_u.values()[..=32].to_vec()).unwrap();
    let half_w = NoisePath::from_slices(full_w.times()[..=32].to_vec(), full_w.slices()[..=32].to_vec()).unwrap();
    let a = riemann_sum(&full_u, &full_w, 6, 0.5).unwrap();
    let b = riemann_sum(&half_u, &half_w, 5, 0.5).unwrap();
    assert!(close(&a, &b, 1e-12));
}

#[test]
fn smooth_surrogate_converges_at_first_order_to_the_closed_form() {
    let g = bump(grid(), 1.5, 1.0);
    let b = bump(grid(), 2.0, 1.0);
    let u = ProcessPath::from_fn(DyadicPartition::new(1.0, 10).unwrap(), |_| Ok(b.clone())).unwrap();
    let w = linear_noise(10, &g);
    // Limit: int_0^1 G_{1-r}(u g) dr, multiplier (1 - cos xi) / xi^2.
    let ug = forward_transform(&product(&b, &g).unwrap());
    let gr = grid();
    let exact = inverse_transform(&ug.apply_multiplier(|i| {
        let xi = gr.frequency_norm(i);
        if xi == 0.0 {
            0.5
        } else {
            (1.0 - xi.cos()) / (xi * xi)
        }
    }))
    .unwrap();
    let errs: Vec<f64> =
        (6..=10).map(|n| riemann_sum(&u, &w, n, 1.0).unwrap().try_sub(&exact).unwrap().max_abs()).collect();
    for p in errs.windows(2) {
        let rate = (p[0] / p[1]).log2();
        assert!((rate - 1.0).abs() < 0.1, "rate {rate}, errors {errs:?}");
    }
}

#[test]
fn cauchy_differences_decay_for_rough_noise() {
    let u = integrand(9);
    let w = noise(9, 6);
    let m = Mollifier::new(DEFAULT_MOMENT_ORDER, grid()).unwrap();
    let spec = PathSpaceSpec::with_default_schedule(0.6, 0.0, 1.0).unwrap();
    let opts = YoungOptions { eval_level: 4, ..Default::default() };
    let r = cauchy_report(&u, &w, 4..=9, &spec, &opts, &m).unwrap();
    assert_eq!(r.rows.len(), 5);
    assert!(r.epsilon_fit.unwrap() > 0.0);
    let (j, rep) = young_integral(&u, &w, 4, 9, &spec, f64::INFINITY, &opts, &m).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.finest_level, 5);
    assert_eq!(j.partition().level(), 4);
}
