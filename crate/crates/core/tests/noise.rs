//! Sampling, coupling and persistence of the truncated noise.

use youngwave::grid::{forward_transform, BoxGrid};
use youngwave::noise::{covariance_oracle, integrability, NoiseConfig, NoisePath, SpectralMeasure};

fn config(dim: usize, level: u32, seed: u64) -> NoiseConfig {
    let grid = if dim == 1 { BoxGrid::new(1, 256, 8.0) } else { BoxGrid::new(2, 64, 4.0) }.unwrap();
    NoiseConfig {
        a0: 0.4,
        measure: SpectralMeasure::RadialRiesz { exponent: 0.5 },
        level,
        seed,
        grid,
        times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
    }
}

#[test]
fn path_starts_at_zero() {
    for dim in [1, 2] {
        let p = NoisePath::sample(&config(dim, 3, 1)).unwrap();
        assert_eq!(p.slices()[0].max_abs(), 0.0);
        assert!(p.slices()[4].max_abs() > 0.0);
    }
}

#[test]
fn level_bands_telescope_exactly_in_frequency() {
    for dim in [1, 2] {
        let c = config(dim, 4, 3);
        let fine = NoisePath::sample_spectra(&c, None).unwrap();
        let coarse = NoisePath::sample_spectra(&c.with_level(3), None).unwrap();
        let band = NoisePath::sample_spectra(&c, Some(3)).unwrap();
        for ((f, g), b) in fine.iter().zip(&coarse).zip(&band) {
            for ((x, y), z) in f.coeffs().iter().zip(g.coeffs()).zip(b.coeffs()) {
                // Each mode lives in exactly one of the two pieces.
                assert!(*y == num_zero() || *z == num_zero());
                assert_eq!(*x, y + z);
            }
        }
    }
}

fn num_zero() -> num_complex::Complex64 {
    num_complex::Complex64::new(0.0, 0.0)
}

#[test]
fn spectra_are_hermitian_so_slices_are_real() {
    let c = config(2, 3, 5);
    let spectra = NoisePath::sample_spectra(&c, None).unwrap();
    let g = c.grid;
    for s in &spectra {
        for i in 0..g.len() {
            assert_eq!(s.coeffs()[g.negated_index(i)], s.coeffs()[i].conj());
        }
    }
    // The grid transform of a sampled slice returns the sampled spectrum.
    let p = NoisePath::sample(&c).unwrap();
    let back = forward_transform(&p.slices()[2]);
    let err = back.coeffs().iter().zip(spectra[2].coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let peak = spectra[2].coeffs().iter().map(|a| a.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * peak);
}

#[test]
fn sampling_is_deterministic_and_seed_sensitive() {
    let c = config(1, 4, 9);
    let a = NoisePath::sample(&c).unwrap();
    let b = NoisePath::sample(&c).unwrap();
    let other = NoisePath::sample(&c.with_seed(10)).unwrap();
    assert_eq!(a.slices(), b.slices());
    assert_ne!(a.slices()[4], other.slices()[4]);
}

#[test]
fn covariance_oracle_is_symmetric_and_stationary() {
    let c = config(1, 4, 0);
    let (x, y) = (100, 130);
    let v = covariance_oracle(&c, x, y, 0.25, 1.0).unwrap();
    assert!((v - covariance_oracle(&c, y, x, 1.0, 0.25).unwrap()).abs() <= 1e-14 * v.abs().max(1.0));
    // Translation by whole cells leaves it unchanged.
    let shifted = covariance_oracle(&c, x + 40, y + 40, 0.25, 1.0).unwrap();
    assert!((v - shifted).abs() <= 1e-12 * v.abs().max(1.0));
    assert_eq!(covariance_oracle(&c, x, y, 0.0, 1.0).unwrap(), 0.0);
    assert!(covariance_oracle(&c, x, x, 1.0, 1.0).unwrap() > 0.0);
}

#[test]
fn empirical_variance_matches_oracle() {
    let c = config(1, 3, 0);
    let x = 128;
    let oracle = covariance_oracle(&c, x, x, 1.0, 1.0).unwrap();
    let n = 800;
    let vals: Vec<f64> = (0..n)
        .map(|s| {
            let p = NoisePath::sample(&c.with_seed(1000 + s)).unwrap();
            p.slices()[4].samples()[x].powi(2)
        })
        .collect();
    let mean = youngwave::stats::mean(&vals);
    let se = youngwave::stats::jackknife_stderr(&vals, 100, youngwave::stats::mean);
    assert!((mean - oracle).abs() < 4.0 * se, "mean {mean} oracle {oracle} se {se}");
}

#[test]
fn gaussian_marginal_has_normal_kurtosis() {
    let c = config(1, 3, 0);
    let x = 64;
    let vals: Vec<f64> = (0..1000u64)
        .map(|s| NoisePath::sample(&c.with_seed(5000 + s)).unwrap().slices()[2].samples()[x])
        .collect();
    let m2 = vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64;
    let m4 = vals.iter().map(|v| v.powi(4)).sum::<f64>() / vals.len() as f64;
    let kurt = m4 / (m2 * m2);
    assert!((kurt - 3.0).abs() < 0.5, "kurtosis {kurt}");
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = NoisePath::sample(&config(2, 3, 2)).unwrap();
    p.save(dir.path()).unwrap();
    let q = NoisePath::load(dir.path()).unwrap();
    assert_eq!(p.times(), q.times());
    assert_eq!(p.slices(), q.slices());
    assert_eq!(p.config(), q.config());
}

#[test]
fn difference_of_levels_is_the_band() {
    let c = config(1, 4, 8);
    let fine = NoisePath::sample(&c).unwrap();
    let coarse = NoisePath::sample(&c.with_level(3)).unwrap();
    let band = NoisePath::sample_band(&c, Some(3)).unwrap();
    let d = fine.difference(&coarse).unwrap();
    for (a, b) in d.slices().iter().zip(band.slices()) {
        assert!(a.try_sub(b).unwrap().max_abs() <= 1e-12 * b.max_abs().max(1e-300));
    }
}

#[test]
fn smooth_test_measure_is_integrable() {
    let r = integrability(&SpectralMeasure::SmoothTest { sigma: 1.0 }, 2, 0.5).unwrap();
    assert!(r.finite);
    let r = integrability(&SpectralMeasure::RadialRiesz { exponent: 0.5 }, 1, 0.2).unwrap();
    assert!(!r.finite);
}
