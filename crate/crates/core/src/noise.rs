//! Gaussian noise, fractional in time and spatially correlated through a
//! spectral measure, sampled on a frequency lattice.
//!
//! The truncated field is
//! `W_t(x) = \sum_{|beta_k| <= 2^n} e^{i beta_k . x} Z_t(k)`,
//! where the `Z(k)` are independent across the half lattice, Hermitian
//! (`Z(-k) = conj Z(k)`), and each is a centred Gaussian process in time with
//! `E[Z_t(k) conj Z_s(k)] = R(t, s) mu(cell_k)`,
//! `R(t, s) = (t^H + s^H - |t - s|^H) / 2`, `H = 2 - a0`.
//! The time law is sampled exactly on the requested times via a Cholesky
//! factor of `R`.
//!
//! Each mode draws from its own random stream keyed on the master seed and
//! the integer wavevector, so two truncation levels sampled with the same
//! seed agree exactly on their shared modes.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;
use statrs::function::erf::erf;

use crate::besov::{combine_levels, lp_blocks, weighted_lp_norm_table, Mollifier, Summability, Weight};
use crate::error::{Error, Result};
use crate::grid::{inverse_transform, pairwise_sum, BoxGrid, Field, SpectralField};
use crate::quadrature::{composite, GaussLegendre};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralMeasure {
    /// Density `\prod_i |beta_i|^{a_i - 1}`, one exponent per axis.
    RieszProduct { exponents: Vec<f64> },
    /// Density `|beta|^{a - d}`.
    RadialRiesz { exponent: f64 },
    /// Centred Gaussian density of unit mass and standard deviation `sigma`.
    SmoothTest { sigma: f64 },
}

impl SpectralMeasure {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            SpectralMeasure::RieszProduct { exponents } => {
                if exponents.len() != dim {
                    return Err(Error::ParamOutOfRange(format!(
                        "expected {dim} axis exponents, got {}",
                        exponents.len()
                    )));
                }
                for &a in exponents {
                    if !(a > 0.0) {
                        return Err(Error::NonIntegrableAtOrigin(format!(
                            "axis exponent {a} must be positive"
                        )));
                    }
                    if !(a < 2.0) {
                        return Err(Error::ParamOutOfRange(format!("axis exponent {a} must be < 2")));
                    }
                }
            }
            SpectralMeasure::RadialRiesz { exponent } => {
                if !(*exponent > 0.0) {
                    return Err(Error::NonIntegrableAtOrigin(format!(
                        "radial exponent {exponent} must be positive"
                    )));
                }
                if !(*exponent < 2.0 * dim as f64) {
                    return Err(Error::ParamOutOfRange(format!(
                        "radial exponent {exponent} must be < {}",
                        2 * dim
                    )));
                }
            }
            SpectralMeasure::SmoothTest { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::ParamOutOfRange(format!("sigma {sigma} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Scaling exponent `a` (sum of axis exponents for the product form).
    pub fn scaling_exponent(&self) -> Option<f64> {
        match self {
            SpectralMeasure::RieszProduct { exponents } => Some(exponents.iter().sum()),
            SpectralMeasure::RadialRiesz { exponent } => Some(*exponent),
            SpectralMeasure::SmoothTest { .. } => None,
        }
    }
}

/// `\int_0^x |b|^{a-1} db` with sign, the antiderivative used for exact cell
/// masses of one-dimensional power laws.
fn power_antiderivative(x: f64, a: f64) -> f64 {
    x.signum() * x.abs().powf(a) / a
}

fn interval_power_mass(lo: f64, hi: f64, a: f64) -> f64 {
    power_antiderivative(hi, a) - power_antiderivative(lo, a)
}

fn interval_gaussian_mass(lo: f64, hi: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    0.5 * (erf(hi / s) - erf(lo / s))
}

/// Mass of `|beta|^{a-2} d beta` over the square `[-c, c]^2`, by symmetry
/// eight times the integral over the triangle `0 <= theta <= pi/4`:
/// `8 \int_0^{pi/4} (c / cos theta)^a / a d theta`.
fn radial_origin_square(c: f64, a: f64) -> f64 {
    8.0 * composite(0.0, PI / 4.0, 4, 32, |th| (c / th.cos()).powf(a) / a)
}

fn radial_cell_mass(center: [f64; 2], half: f64, a: f64, near: bool) -> f64 {
    let order = if near { 24 } else { 8 };
    let rule = GaussLegendre::new(order);
    let mut acc = 0.0;
    for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
        for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
            let b1 = center[0] + half * x;
            let b2 = center[1] + half * y;
            acc += wx * wy * (b1 * b1 + b2 * b2).powf(0.5 * (a - 2.0));
        }
    }
    acc * half * half
}

/// Measure of every lattice cell `beta_k + [-dxi/2, dxi/2]^d` with
/// `|beta_k| <= 2^level`, indexed like the spectrum; zero elsewhere and on the
/// Nyquist lines.
pub fn mode_weights(measure: &SpectralMeasure, grid: &BoxGrid, level: u32) -> Result<Vec<f64>> {
    measure.validate(grid.dim())?;
    check_level(grid, level)?;
    let radius = 2f64.powi(level as i32);
    Ok(band_weights(measure, grid, None, radius))
}

fn check_level(grid: &BoxGrid, level: u32) -> Result<()> {
    if 2f64.powi(level as i32) > grid.nyquist() {
        return Err(Error::ParamOutOfRange(format!(
            "truncation radius 2^{level} exceeds the grid's Nyquist frequency {}",
            grid.nyquist()
        )));
    }
    Ok(())
}

/// Cell masses for `inner < |beta_k| <= outer` (`inner = None` includes the origin).
fn band_weights(measure: &SpectralMeasure, grid: &BoxGrid, inner: Option<f64>, outer: f64) -> Vec<f64> {
    let dxi = grid.frequency_spacing();
    let half = 0.5 * dxi;
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if grid.is_nyquist(idx) {
                return 0.0;
            }
            let r = grid.frequency_norm(idx);
            if r > outer || inner.is_some_and(|lo| r <= lo) {
                return 0.0;
            }
            let c = grid.frequency(idx);
            let dim = grid.dim();
            match measure {
                SpectralMeasure::RieszProduct { exponents } => (0..dim)
                    .map(|i| interval_power_mass(c[i] - half, c[i] + half, exponents[i]))
                    .product(),
                SpectralMeasure::RadialRiesz { exponent } => {
                    if dim == 1 {
                        interval_power_mass(c[0] - half, c[0] + half, *exponent)
                    } else if r == 0.0 {
                        radial_origin_square(half, *exponent)
                    } else {
                        let k = grid.wavevector(idx);
                        let near = k[0].abs().max(k[1].abs()) <= 3;
                        radial_cell_mass(c, half, *exponent, near)
                    }
                }
                SpectralMeasure::SmoothTest { sigma } => (0..dim)
                    .map(|i| interval_gaussian_mass(c[i] - half, c[i] + half, *sigma))
                    .product(),
            }
        })
        .collect()
}

/// Temporal covariance `R(t, s) = (t^H + s^H - |t - s|^H)/2`, `H = 2 - a0`.
pub fn temporal_covariance(a0: f64, t: f64, s: f64) -> f64 {
    let h = 2.0 - a0;
    0.5 * (t.abs().powf(h) + s.abs().powf(h) - (t - s).abs().powf(h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub a0: f64,
    pub measure: SpectralMeasure,
    pub level: u32,
    pub seed: u64,
    pub grid: BoxGrid,
    pub times: Vec<f64>,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0 < 2.0) {
            return Err(Error::ParamOutOfRange(format!("a0 = {} must lie in (0, 2)", self.a0)));
        }
        self.measure.validate(self.grid.dim())?;
        check_level(&self.grid, self.level)?;
        if self.times.first() != Some(&0.0) {
            return Err(Error::PartitionMismatch("noise times must start at 0".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::PartitionMismatch("noise times must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn with_level(&self, level: u32) -> Self {
        Self { level, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Lower Cholesky factor of `[R(t_i, t_j)]` over the nonzero times.
    pub fn temporal_cholesky(&self) -> Result<DMatrix<f64>> {
        let ts = &self.times[1..];
        let n = ts.len();
        let r = DMatrix::from_fn(n, n, |i, j| temporal_covariance(self.a0, ts[i], ts[j]));
        r.cholesky().map(|c| c.l()).ok_or(Error::CholeskyFailure)
    }
}

/// A sampled (or hand-built) noise path: one field per time.
#[derive(Debug, Clone)]
pub struct NoisePath {
    config: Option<NoiseConfig>,
    times: Vec<f64>,
    slices: Vec<Field>,
    temporal_chol: Option<DMatrix<f64>>,
}

fn mode_stream(seed: u64, k: [i64; 2]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = ((k[0] as i32 as u32 as u64) << 32) | (k[1] as i32 as u32 as u64);
    rng.set_stream(key);
    rng
}

/// True for the representative of each `{k, -k}` pair (and for `k = 0`).
fn is_canonical(k: [i64; 2]) -> bool {
    k[0] > 0 || (k[0] == 0 && k[1] >= 0)
}

/// Spectra of the noise on its times, restricted to `inner < |beta| <= 2^level`.
fn sample_spectra(config: &NoiseConfig, inner: Option<u32>) -> Result<(Vec<SpectralField>, DMatrix<f64>)> {
    config.validate()?;
    let grid = config.grid;
    let outer = 2f64.powi(config.level as i32);
    let inner_r = inner.map(|l| 2f64.powi(l as i32));
    let masses = band_weights(&config.measure, &grid, inner_r, outer);
    let chol = config.temporal_cholesky()?;
    let steps = config.times.len() - 1;
    let scale = grid.box_volume();
    let modes: Vec<usize> = (0..grid.len())
        .filter(|&i| masses[i] > 0.0 && is_canonical(grid.wavevector(i)))
        .collect();
    let draws: Vec<(usize, Vec<Complex64>)> = modes
        .par_iter()
        .map(|&idx| {
            let k = grid.wavevector(idx);
            let mut rng = mode_stream(config.seed, k);
            let real = k == [0, 0];
            let z: Vec<Complex64> = (0..steps)
                .map(|_| {
                    let x: f64 = rng.sample(StandardNormal);
                    if real {
                        Complex64::new(x, 0.0)
                    } else {
                        let y: f64 = rng.sample(StandardNormal);
                        Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
                    }
                })
                .collect();
            let amp = masses[idx].sqrt() * scale;
            let values = (0..steps)
                .map(|i| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, zl) in z.iter().enumerate().take(i + 1) {
                        acc += zl * chol[(i, l)];
                    }
                    acc * amp
                })
                .collect();
            (idx, values)
        })
        .collect();
    let mut spectra = vec![SpectralField::zeros(grid); steps + 1];
    for (idx, values) in &draws {
        let neg = grid.negated_index(*idx);
        for (i, v) in values.iter().enumerate() {
            let c = spectra[i + 1].coeffs_mut();
            c[*idx] = *v;
            if neg != *idx {
                c[neg] = v.conj();
            }
        }
    }
    Ok((spectra, chol))
}

impl NoisePath {
    /// Samples the truncated noise on the configured times.
    pub fn sample(config: &NoiseConfig) -> Result<NoisePath> {
        Self::sample_band(config, None)
    }

    /// Samples only the modes with `2^inner < |beta| <= 2^level`, using the
    /// same per-mode streams as [`NoisePath::sample`]; with
    /// `inner = level - 1` this is exactly the increment between two levels.
    pub fn sample_band(config: &NoiseConfig, inner: Option<u32>) -> Result<NoisePath> {
        let (spectra, chol) = sample_spectra(config, inner)?;
        let slices = spectra
            .par_iter()
            .map(inverse_transform)
            .collect::<Result<Vec<_>>>()?;
        Ok(NoisePath {
            config: Some(config.clone()),
            times: config.times.clone(),
            slices,
            temporal_chol: Some(chol),
        })
    }

    /// Spectra of each slice, as sampled (for exact coupling checks).
    pub fn sample_spectra(config: &NoiseConfig, inner: Option<u32>) -> Result<Vec<SpectralField>> {
        Ok(sample_spectra(config, inner)?.0)
    }

    /// Wraps hand-built slices (deterministic surrogates, loaded data).
    pub fn from_slices(times: Vec<f64>, slices: Vec<Field>) -> Result<NoisePath> {
        if slices.is_empty() {
            return Err(Error::EmptyPath);
        }
        if times.len() != slices.len() {
            return Err(Error::PartitionMismatch(format!(
                "{} times for {} slices",
                times.len(),
                slices.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::PartitionMismatch("times must be strictly increasing".into()));
        }
        let grid = *slices[0].grid();
        if slices.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(NoisePath { config: None, times, slices, temporal_chol: None })
    }

    pub fn config(&self) -> Option<&NoiseConfig> {
        self.config.as_ref()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn grid(&self) -> &BoxGrid {
        self.slices[0].grid()
    }

    pub fn temporal_cholesky(&self) -> Option<&DMatrix<f64>> {
        self.temporal_chol.as_ref()
    }

    /// Same path with every slice multiplied by `c`.
    pub fn scaled(&self, c: f64) -> NoisePath {
        NoisePath {
            config: self.config.clone(),
            times: self.times.clone(),
            slices: self.slices.iter().map(|s| s.scaled(c)).collect(),
            temporal_chol: self.temporal_chol.clone(),
        }
    }

    /// Slice-wise difference `self - other` on identical times.
    pub fn difference(&self, other: &NoisePath) -> Result<NoisePath> {
        if self.times != other.times {
            return Err(Error::PartitionMismatch("paths live on different times".into()));
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<Vec<_>>>()?;
        NoisePath::from_slices(self.times.clone(), slices)
    }

    /// Writes `slice_NNNNN.bwf` snapshots and a `noise.json` sidecar.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for (i, s) in self.slices.iter().enumerate() {
            s.write_bwf(dir.join(format!("slice_{i:05}.bwf")))?;
        }
        let sidecar = Sidecar { config: self.config.clone(), times: self.times.clone() };
        fs::write(dir.join("noise.json"), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<NoisePath> {
        let dir = dir.as_ref();
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(dir.join("noise.json"))?)?;
        let slices = (0..sidecar.times.len())
            .map(|i| Field::read_bwf(dir.join(format!("slice_{i:05}.bwf"))))
            .collect::<Result<Vec<_>>>()?;
        let mut path = NoisePath::from_slices(sidecar.times, slices)?;
        if let Some(cfg) = sidecar.config {
            path.temporal_chol = Some(cfg.temporal_cholesky()?);
            path.config = Some(cfg);
        }
        Ok(path)
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    config: Option<NoiseConfig>,
    times: Vec<f64>,
}

/// `E[W_t(x) W_s(y)]` of the truncated noise, for grid indices `x`, `y`.
pub fn covariance_oracle(config: &NoiseConfig, x: usize, y: usize, s: f64, t: f64) -> Result<f64> {
    let masses = mode_weights(&config.measure, &config.grid, config.level)?;
    Ok(covariance_with_masses(&config.grid, &masses, config.a0, x, y, s, t))
}

/// [`covariance_oracle`] with precomputed cell masses.
pub fn covariance_with_masses(grid: &BoxGrid, masses: &[f64], a0: f64, x: usize, y: usize, s: f64, t: f64) -> f64 {
    let px = grid.point(x);
    let py = grid.point(y);
    let dx = [px[0] - py[0], px[1] - py[1]];
    let terms: Vec<f64> = masses
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0)
        .map(|(k, m)| {
            let b = grid.frequency(k);
            m * (b[0] * dx[0] + b[1] * dx[1]).cos()
        })
        .collect();
    temporal_covariance(a0, t, s) * pairwise_sum(&terms)
}

/// Smallest `p` for which the Hölder–Besov estimate of the noise applies,
/// `1 / (1 - a0/2 - theta)`.
pub fn garsia_p_bound(a0: f64, theta: f64) -> f64 {
    1.0 / (1.0 - a0 / 2.0 - theta)
}

/// Discrete `C^theta([0,T]; B^{-alpha, P}_{p,inf})` norm over the path's times:
/// `sup_t ||W_t|| + sup_{s<t} ||W_t - W_s|| / (t-s)^theta`.
pub fn holder_besov_norm(path: &NoisePath, theta: f64, alpha: f64, p: f64, m: &Mollifier) -> Result<f64> {
    if let Some(cfg) = path.config() {
        let top = 1.0 - cfg.a0 / 2.0;
        if !(theta > 0.0 && theta < top) {
            return Err(Error::ParamOutOfRange(format!("theta = {theta} must lie in (0, {top})")));
        }
    } else if !(theta > 0.0) {
        return Err(Error::ParamOutOfRange(format!("theta = {theta} must be positive")));
    }
    if !(alpha > 0.0) {
        return Err(Error::ParamOutOfRange(format!("alpha = {alpha} must be positive")));
    }
    holder_besov_norm_unchecked(path.times(), path.slices(), theta, alpha, p, m)
}

/// [`holder_besov_norm`] without the exponent range checks (used to probe
/// what happens past the sharp threshold).
pub fn holder_besov_norm_unchecked(times: &[f64], slices: &[Field], theta: f64, alpha: f64, p: f64, m: &Mollifier) -> Result<f64> {
    if slices.is_empty() {
        return Err(Error::EmptyPath);
    }
    let blocks: Vec<Vec<Field>> = slices
        .par_iter()
        .map(|s| lp_blocks(s, m))
        .collect::<Result<_>>()?;
    let weights = Weight::Polynomial.table(m.grid());
    let h_d = m.grid().cell_volume();
    let level_norm = |vals: &dyn Fn(usize) -> Vec<f64>| -> f64 {
        let b: Vec<f64> = (0..blocks[0].len())
            .map(|j| weighted_lp_norm_table(&vals(j), p, &weights, h_d))
            .collect();
        combine_levels(&b, -alpha, Summability::Sup)
    };
    let sup_term = (0..slices.len())
        .into_par_iter()
        .map(|i| level_norm(&|j| blocks[i][j].samples().to_vec()))
        .reduce(|| 0.0, f64::max);
    let holder = (1..slices.len())
        .into_par_iter()
        .map(|ti| {
            (0..ti)
                .map(|si| {
                    let d = level_norm(&|j| {
                        blocks[ti][j]
                            .samples()
                            .iter()
                            .zip(blocks[si][j].samples())
                            .map(|(a, b)| a - b)
                            .collect()
                    });
                    d / (times[ti] - times[si]).powf(theta)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup_term + holder)
}

/// Lattice evaluation of `\int (1 + |beta|)^{-e} mu(d beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub exponent: f64,
    /// Integral over `|beta| <= 2^16`.
    pub partial: f64,
    /// Ratio of the last two dyadic shell integrals (`< 1` means decaying).
    pub shell_ratio: f64,
    /// Geometric extrapolation of the remaining shells (infinite if not decaying).
    pub tail: f64,
    pub finite: bool,
}

/// Upper truncation `2^16` of the radial integration.
pub const INTEGRABILITY_CUTOFF_LEVEL: i32 = 16;

/// Evaluates `\int (1 + |beta|)^{-e} mu(d beta)` over dyadic shells up to
/// `2^16` and extrapolates the tail from the last shell ratio.
pub fn integrability(measure: &SpectralMeasure, dim: usize, exponent: f64) -> Result<IntegrabilityReport> {
    measure.validate(dim)?;
    // Every cataloged measure is r^{a-1} dr times an angular constant in
    // polar coordinates (the Gaussian is handled by its own radial density).
    let radial: Box<dyn Fn(f64) -> f64 + Sync> = match measure {
        SpectralMeasure::RadialRiesz { exponent: a } => {
            let c = if dim == 1 { 2.0 } else { 2.0 * PI };
            let a = *a;
            Box::new(move |r: f64| c * r.powf(a - 1.0))
        }
        SpectralMeasure::RieszProduct { exponents } => {
            let a: f64 = exponents.iter().sum();
            let c = if dim == 1 { 2.0 } else { 2.0 * beta(exponents[0] / 2.0, exponents[1] / 2.0) };
            Box::new(move |r: f64| c * r.powf(a - 1.0))
        }
        SpectralMeasure::SmoothTest { sigma } => {
            let s2 = sigma * sigma;
            let norm = (2.0 * PI * s2).powf(-(dim as f64) / 2.0);
            let c = if dim == 1 { 2.0 } else { 2.0 * PI };
            let d = dim as i32;
            Box::new(move |r: f64| c * norm * r.powi(d - 1) * (-r * r / (2.0 * s2)).exp())
        }
    };
    let integrand = |r: f64| (1.0 + r).powf(-exponent) * radial(r);
    // Unit ball: substitute r = u^{1/a} to absorb the r^{a-1} singularity.
    let core = match measure.scaling_exponent() {
        Some(a) => composite(0.0, 1.0, 8, 32, |u| {
            if u == 0.0 {
                return 0.0;
            }
            let r = u.powf(1.0 / a);
            integrand(r) * r.powf(1.0 - a) * r / (a * u)
        }),
        None => composite(0.0, 1.0, 8, 32, integrand),
    };
    let shells: Vec<f64> = (0..INTEGRABILITY_CUTOFF_LEVEL)
        .map(|k| composite(2f64.powi(k), 2f64.powi(k + 1), 4, 32, integrand))
        .collect();
    let partial = core + shells.iter().sum::<f64>();
    let n = shells.len();
    let shell_ratio = shells[n - 1] / shells[n - 2];
    let (tail, finite) = if shells[n - 1] <= f64::EPSILON * partial {
        (0.0, true)
    } else if shell_ratio < 1.0 {
        (shells[n - 1] * shell_ratio / (1.0 - shell_ratio), true)
    } else {
        (f64::INFINITY, false)
    };
    Ok(IntegrabilityReport { exponent, partial, shell_ratio, tail, finite })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> BoxGrid {
        BoxGrid::new(1, 256, 8.0).unwrap()
    }

    #[test]
    fn origin_cell_uses_power_law() {
        let g = grid();
        let w = mode_weights(&SpectralMeasure::RadialRiesz { exponent: 0.5 }, &g, 4).unwrap();
        let half = g.frequency_spacing() / 2.0;
        assert!((w[0] - 2.0 * half.sqrt() * 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_origin_square() {
        // a = 2 gives a flat density: the mass is the square's area.
        assert!((radial_origin_square(0.3, 2.0) - 0.36).abs() < 1e-13);
        // a = 1: 8 c \int_0^{pi/4} sec = 8 c ln(1 + sqrt 2)
        let exact = 8.0 * 0.3 * (1.0 + 2f64.sqrt()).ln();
        assert!((radial_origin_square(0.3, 1.0) - exact).abs() < 1e-12);
    }

    #[test]
    fn exponents_out_of_range() {
        let g = grid();
        assert!(matches!(
            mode_weights(&SpectralMeasure::RadialRiesz { exponent: 0.0 }, &g, 2),
            Err(Error::NonIntegrableAtOrigin(_))
        ));
        assert!(matches!(
            mode_weights(&SpectralMeasure::RieszProduct { exponents: vec![-0.5] }, &g, 2),
            Err(Error::NonIntegrableAtOrigin(_))
        ));
        assert!(mode_weights(&SpectralMeasure::RadialRiesz { exponent: 2.5 }, &g, 2).is_err());
        // 2^6 = 64 exceeds the Nyquist frequency 16 pi / 2.
        assert!(mode_weights(&SpectralMeasure::RadialRiesz { exponent: 0.5 }, &g, 6).is_err());
    }

    #[test]
    fn temporal_covariance_diagonal() {
        for &t in &[0.1, 0.5, 1.0] {
            assert!((temporal_covariance(0.3, t, t) - t.powf(1.7)).abs() < 1e-15);
        }
        assert_eq!(temporal_covariance(0.3, 0.0, 0.7), 0.0);
    }

    #[test]
    fn duplicated_times_rejected() {
        let cfg = NoiseConfig {
            a0: 0.5,
            measure: SpectralMeasure::RadialRiesz { exponent: 0.5 },
            level: 3,
            seed: 1,
            grid: grid(),
            times: vec![0.0, 0.5, 0.5],
        };
        assert!(NoisePath::sample(&cfg).is_err());
    }

    #[test]
    fn integrability_verdicts() {
        let m = SpectralMeasure::RadialRiesz { exponent: 0.5 };
        assert!(integrability(&m, 1, 0.6).unwrap().finite);
        assert!(!integrability(&m, 1, 0.4).unwrap().finite);
        let g = SpectralMeasure::SmoothTest { sigma: 2.0 };
        let r = integrability(&g, 2, 0.0).unwrap();
        assert!(r.finite && (r.partial - 1.0).abs() < 1e-10);
    }
}
