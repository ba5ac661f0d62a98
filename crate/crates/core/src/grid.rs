//! Uniform periodic grids on the box `[-L, L)^d`, the spectral transform pair
//! used throughout the crate, and quadrature of sampled fields.
//!
//! A grid with `n` points per axis has spacing `h = 2L/n` and nodes
//! `x_i = -L + i h`. Spectral coefficients approximate the continuum Fourier
//! transform `F(xi) = \int f(x) e^{-i xi.x} dx` at the lattice
//! `xi_k = (pi/L) k`, with `k` in the usual FFT index order. The inverse uses
//! the Fourier-series normalisation `f(x) = (2L)^{-d} \sum_k F(xi_k) e^{i xi_k.x}`,
//! so `inverse(forward(f)) == f` up to rounding and Parseval reads
//! `\sum |f|^2 h^d = (2L)^{-d} \sum |F|^2`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::{Add, Mul, Sub};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Imaginary residue (relative to the field's magnitude) above which an
/// inverse transform is rejected as non-Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Relative threshold below which samples count as zero when measuring the
/// extent of a field's support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl BoxGrid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 8, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        Ok(Self { dim, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Spacing of the frequency lattice, `pi / L`.
    pub fn frequency_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Largest resolvable frequency along an axis, `pi n / (2L)`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / (2.0 * self.half_width)
    }

    /// Same box with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dim, self.n * factor, self.half_width)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Per-axis indices of a flat (row-major) sample index.
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flat_index(&self, axes: [usize; 2]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[0] * self.n + axes[1]
        }
    }

    /// Physical position of a sample; the unused second entry is zero in 1-D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.coordinate(i), 0.0]
        } else {
            [self.coordinate(i), self.coordinate(j)]
        }
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let p = self.point(idx);
        p[0].hypot(p[1])
    }

    /// Signed integer wavenumber of an FFT axis index.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Integer wavevector of a flat spectral index.
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        let [i, j] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.wavenumber(i), 0]
        } else {
            [self.wavenumber(i), self.wavenumber(j)]
        }
    }

    /// Squared integer length `|k|^2` of a spectral index.
    pub fn wavenumber_sq(&self, idx: usize) -> u64 {
        let [a, b] = self.wavevector(idx);
        (a * a + b * b) as u64
    }

    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.wavevector(idx);
        let dx = self.frequency_spacing();
        [a as f64 * dx, b as f64 * dx]
    }

    pub fn frequency_norm(&self, idx: usize) -> f64 {
        (self.wavenumber_sq(idx) as f64).sqrt() * self.frequency_spacing()
    }

    /// True when some axis sits on the (unpaired) Nyquist wavenumber `-n/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let [i, j] = self.axis_indices(idx);
        i == self.n / 2 || (self.dim == 2 && j == self.n / 2)
    }

    /// Flat spectral index of an integer wavevector, if representable.
    pub fn spectral_index(&self, k: [i64; 2]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let axis = |w: i64| -> Option<usize> {
            if w >= -half && w < half {
                Some(if w >= 0 { w as usize } else { (w + self.n as i64) as usize })
            } else {
                None
            }
        };
        let i = axis(k[0])?;
        if self.dim == 1 {
            (k[1] == 0).then_some(i)
        } else {
            Some(self.flat_index([i, axis(k[1])?]))
        }
    }

    /// Spectral index of `-k`.
    pub fn negated_index(&self, idx: usize) -> usize {
        let [i, j] = self.axis_indices(idx);
        let neg = |a: usize| (self.n - a) % self.n;
        self.flat_index([neg(i), if self.dim == 1 { 0 } else { neg(j) }])
    }

    fn check_same(&self, other: &BoxGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Real samples of a function on a [`BoxGrid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: BoxGrid,
    samples: Vec<f64>,
}

/// How far the non-negligible part of a field extends from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extent {
    /// No sample exceeds the threshold.
    Empty,
    /// All significant samples lie within this Euclidean radius, away from the
    /// box boundary.
    Localized(f64),
    /// Significant samples reach the boundary; the field is periodic data on
    /// the torus rather than a compactly supported function.
    Periodic,
}

impl Field {
    pub fn new(grid: BoxGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("samples must be finite".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: BoxGrid) -> Self {
        Self { grid, samples: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: BoxGrid, value: f64) -> Self {
        Self { grid, samples: vec![value; grid.len()] }
    }

    /// Samples `f` at every grid point (the second coordinate is 0 in 1-D).
    pub fn from_fn(grid: BoxGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let samples = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, samples }
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { grid: self.grid, samples: self.samples.iter().map(|v| v * c).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + c * b).collect();
        Ok(Field { grid: self.grid, samples })
    }

    pub fn try_add(&self, other: &Field) -> Result<Field> {
        self.add_scaled(1.0, other)
    }

    pub fn try_sub(&self, other: &Field) -> Result<Field> {
        self.add_scaled(-1.0, other)
    }

    /// Pointwise product without de-aliasing.
    pub fn pointwise(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect();
        Ok(Field { grid: self.grid, samples })
    }

    pub fn extent(&self) -> Extent {
        let peak = self.max_abs();
        if peak == 0.0 {
            return Extent::Empty;
        }
        let cut = SUPPORT_THRESHOLD * peak;
        let last = self.grid.n - 1;
        let mut radius = 0.0_f64;
        for (idx, v) in self.samples.iter().enumerate() {
            if v.abs() <= cut {
                continue;
            }
            let [i, j] = self.grid.axis_indices(idx);
            let on_edge = i == 0 || i == last || (self.grid.dim == 2 && (j == 0 || j == last));
            if on_edge {
                return Extent::Periodic;
            }
            radius = radius.max(self.grid.radius(idx));
        }
        Extent::Localized(radius)
    }

    /// Fails when propagating this field at unit speed for `time` would carry
    /// a localized support across the periodic boundary.
    pub fn check_propagation(&self, time: f64) -> Result<()> {
        if let Extent::Localized(r) = self.extent() {
            if r + time.abs() > self.grid.half_width {
                return Err(Error::WrapAroundRisk {
                    radius: r,
                    time,
                    half_width: self.grid.half_width,
                });
            }
        }
        Ok(())
    }

    /// Bilinear (linear in 1-D) interpolation onto another grid covering the
    /// same box, treating the data as periodic.
    pub fn resample(&self, target: BoxGrid) -> Result<Field> {
        if target.dim != self.grid.dim || target.half_width != self.grid.half_width {
            return Err(Error::GridMismatch);
        }
        if target == self.grid {
            return Ok(self.clone());
        }
        let n = self.grid.n;
        let h = self.grid.spacing();
        let locate = |x: f64| -> (usize, usize, f64) {
            let s = (x + self.grid.half_width) / h;
            let i = s.floor();
            let frac = s - i;
            let i0 = (i as i64).rem_euclid(n as i64) as usize;
            (i0, (i0 + 1) % n, frac)
        };
        let out = Field::from_fn(target, |p| {
            let (a0, a1, fa) = locate(p[0]);
            if self.grid.dim == 1 {
                (1.0 - fa) * self.samples[a0] + fa * self.samples[a1]
            } else {
                let (b0, b1, fb) = locate(p[1]);
                let at = |i: usize, j: usize| self.samples[i * n + j];
                (1.0 - fa) * ((1.0 - fb) * at(a0, b0) + fb * at(a0, b1))
                    + fa * ((1.0 - fb) * at(a1, b0) + fb * at(a1, b1))
            }
        });
        Ok(out)
    }

    /// Serialises in the `BWF1` snapshot layout: magic, little-endian `u32`
    /// dimension and points per axis, `f64` half-width, then the samples.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * self.samples.len());
        out.extend_from_slice(b"BWF1");
        out.extend_from_slice(&(self.grid.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.grid.n as u32).to_le_bytes());
        out.extend_from_slice(&self.grid.half_width.to_le_bytes());
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Field> {
        if bytes.len() < 20 || &bytes[..4] != b"BWF1" {
            return Err(Error::Format("missing BWF1 header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let dim = u32_at(4);
        let n = u32_at(8);
        let half_width = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let grid = BoxGrid::new(dim, n, half_width).map_err(|e| Error::Format(e.to_string()))?;
        let body = &bytes[20..];
        if body.len() != 8 * grid.len() {
            return Err(Error::Format(format!(
                "expected {} sample bytes, found {}",
                8 * grid.len(),
                body.len()
            )));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Field::new(grid, samples).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_bwf(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_bwf(path: impl AsRef<Path>) -> Result<Field> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        Field::from_bytes(&bytes)
    }
}

impl Add<&Field> for &Field {
    type Output = Field;
    /// Panics if the grids differ; use [`Field::try_add`] to handle that case.
    fn add(self, rhs: &Field) -> Field {
        self.try_add(rhs).expect("grid mismatch in field addition")
    }
}

impl Sub<&Field> for &Field {
    type Output = Field;
    /// Panics if the grids differ; use [`Field::try_sub`] to handle that case.
    fn sub(self, rhs: &Field) -> Field {
        self.try_sub(rhs).expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, c: f64) -> Field {
        self.scaled(c)
    }
}

/// Spectral coefficients of a field, indexed like the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: BoxGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: BoxGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: BoxGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Multiplies every coefficient by a real multiplier given as a function
    /// of the spectral index.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> SpectralField {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * m(i)).collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn add_scaled(&mut self, c: f64, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * c;
        }
        Ok(())
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap_or_else(|e| e.into_inner());
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalised in-place DFT along every axis.
fn dft_in_place(buf: &mut [Complex64], grid: &BoxGrid, inverse: bool) {
    let fft = plan(grid.n, inverse);
    fft.process(buf);
    if grid.dim == 2 {
        transpose_square(buf, grid.n);
        fft.process(buf);
        transpose_square(buf, grid.n);
    }
}

/// `(-1)^{i_1 + i_2}`, the phase produced by the box starting at `-L`.
#[inline]
fn parity_sign(grid: &BoxGrid, idx: usize) -> f64 {
    let [i, j] = grid.axis_indices(idx);
    if (i + j) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_transform(f: &Field) -> SpectralField {
    let grid = f.grid;
    let mut buf: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_in_place(&mut buf, &grid, false);
    let scale = grid.cell_volume();
    for (idx, c) in buf.iter_mut().enumerate() {
        *c *= scale * parity_sign(&grid, idx);
    }
    SpectralField { grid, coeffs: buf }
}

/// Inverse transform; rejects spectra whose synthesis is not real.
pub fn inverse_transform(s: &SpectralField) -> Result<Field> {
    let grid = s.grid;
    let mut buf: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * parity_sign(&grid, idx))
        .collect();
    dft_in_place(&mut buf, &grid, true);
    let scale = 1.0 / grid.box_volume();
    let mut residue = 0.0_f64;
    let mut peak = 0.0_f64;
    let samples: Vec<f64> = buf
        .iter()
        .map(|c| {
            residue = residue.max((c.im * scale).abs());
            peak = peak.max((c.re * scale).abs());
            c.re * scale
        })
        .collect();
    if residue > HERMITIAN_TOLERANCE * peak.max(1.0) {
        return Err(Error::NonHermitianInput { residue });
    }
    Field::new(grid, samples)
}

/// Periodic convolution `h^d \sum_y f(x - y) g(y)` computed spectrally.
pub fn convolve(f: &Field, g: &Field) -> Result<Field> {
    f.grid.check_same(&g.grid)?;
    let a = forward_transform(f);
    let b = forward_transform(g);
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).collect();
    inverse_transform(&SpectralField { grid: f.grid, coeffs })
}

/// Rectangle-rule integral `h^d \sum f`, spectrally accurate for smooth
/// periodic or compactly supported data.
pub fn integrate(f: &Field) -> f64 {
    f.grid.cell_volume() * pairwise_sum(&f.samples)
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Copies coefficients onto a grid with twice the points per axis, splitting
/// the Nyquist coefficient between `+-n/2` so the padded spectrum stays
/// Hermitian.
fn pad_spectrum(s: &SpectralField) -> SpectralField {
    let grid = s.grid;
    let fine = grid.refined(2).expect("refining a valid grid");
    let half = (grid.n / 2) as i64;
    let mut out = SpectralField::zeros(fine);
    for (idx, c) in s.coeffs.iter().enumerate() {
        let k = grid.wavevector(idx);
        let split = |w: i64| -> Vec<i64> {
            if w == -half {
                vec![-half, half]
            } else {
                vec![w]
            }
        };
        let first = split(k[0]);
        let second = if grid.dim == 1 { vec![0] } else { split(k[1]) };
        let share = 1.0 / (first.len() * second.len()) as f64;
        for &a in &first {
            for &b in &second {
                let target = fine.spectral_index([a, b]).expect("padded index in range");
                out.coeffs[target] += c * share;
            }
        }
    }
    out
}

/// Spectrum of the product `f g`, computed on a twice-refined grid and
/// truncated back to the wavenumbers `|k_i| < n/2` (the Nyquist line is
/// dropped).
pub fn product_spectrum(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.grid.check_same(&g.grid)?;
    let grid = f.grid;
    let a = inverse_transform(&pad_spectrum(f))?;
    let b = inverse_transform(&pad_spectrum(g))?;
    let prod = a.pointwise(&b)?;
    let fine_spec = forward_transform(&prod);
    let fine = fine_spec.grid;
    let mut out = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let src = fine.spectral_index(grid.wavevector(idx)).expect("coarse index on fine grid");
        out.coeffs[idx] = fine_spec.coeffs[src];
    }
    Ok(out)
}

/// De-aliased pointwise product of two fields on the same grid.
pub fn product(f: &Field, g: &Field) -> Result<Field> {
    f.grid.check_same(&g.grid)?;
    inverse_transform(&product_spectrum(&forward_transform(f), &forward_transform(g))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: BoxGrid, sigma: f64) -> Field {
        Field::from_fn(grid, |p| (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * sigma * sigma)).exp())
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(BoxGrid::new(3, 64, 1.0).is_err());
        assert!(BoxGrid::new(1, 48, 1.0).is_err());
        assert!(BoxGrid::new(1, 4, 1.0).is_err());
        assert!(BoxGrid::new(2, 64, 0.0).is_err());
    }

    #[test]
    fn constant_integrates_to_box_volume() {
        let g = BoxGrid::new(2, 32, 3.0).unwrap();
        assert!((integrate(&Field::constant(g, 1.0)) - 36.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_transform_matches_continuum() {
        let g = BoxGrid::new(1, 256, 10.0).unwrap();
        let f = gaussian(g, 1.0);
        let s = forward_transform(&f);
        for idx in 0..g.len() {
            let xi = g.frequency_norm(idx);
            let exact = (2.0 * std::f64::consts::PI).sqrt() * (-xi * xi / 2.0).exp();
            assert!((s.coeffs()[idx] - Complex64::new(exact, 0.0)).norm() < 1e-12, "k = {idx}");
        }
    }

    #[test]
    fn nonhermitian_spectrum_is_rejected() {
        let g = BoxGrid::new(1, 16, 1.0).unwrap();
        let mut s = SpectralField::zeros(g);
        s.coeffs_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(inverse_transform(&s), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let g = BoxGrid::new(1, 32, 2.0).unwrap();
        let f = Field::from_fn(g, |p| (p[0] * 1.3).sin() + 0.2 * p[0]);
        let k = gaussian(g, 0.3);
        let c = convolve(&f, &k).unwrap();
        let n = g.n();
        let h = g.spacing();
        for i in 0..n {
            // f(x_i - y_j) with x_i - y_j = x_{i - j + n/2} on the periodic grid.
            let direct: f64 = (0..n)
                .map(|j| f.samples()[(i + n + n / 2 - j) % n] * k.samples()[j])
                .sum::<f64>()
                * h;
            assert!((c.samples()[i] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn product_of_band_limited_fields_is_exact() {
        let g = BoxGrid::new(2, 32, std::f64::consts::PI).unwrap();
        let f = Field::from_fn(g, |p| (3.0 * p[0]).cos() + (2.0 * p[1]).sin());
        let h = Field::from_fn(g, |p| (4.0 * p[0] + p[1]).cos());
        let direct = f.pointwise(&h).unwrap();
        let de_aliased = product(&f, &h).unwrap();
        let err = (&direct - &de_aliased).max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn product_drops_aliased_modes() {
        // cos(6x)^2 = (1 + cos(12x))/2, and wavenumber 12 is beyond n/2 = 8.
        let g = BoxGrid::new(1, 16, std::f64::consts::PI).unwrap();
        let f = Field::from_fn(g, |p| (6.0 * p[0]).cos());
        let p = product(&f, &f).unwrap();
        for v in p.samples() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn extent_classifies_support() {
        let g = BoxGrid::new(1, 128, 8.0).unwrap();
        assert_eq!(Field::zeros(g).extent(), Extent::Empty);
        assert_eq!(Field::constant(g, 1.0).extent(), Extent::Periodic);
        match gaussian(g, 0.5).extent() {
            Extent::Localized(r) => assert!(r > 3.0 && r < 4.0, "{r}"),
            other => panic!("{other:?}"),
        }
        assert!(gaussian(g, 0.5).check_propagation(1.0).is_ok());
        assert!(matches!(
            gaussian(g, 0.5).check_propagation(5.0),
            Err(Error::WrapAroundRisk { .. })
        ));
    }

    #[test]
    fn bytes_round_trip() {
        let g = BoxGrid::new(2, 8, 1.5).unwrap();
        let f = Field::from_fn(g, |p| p[0] - 2.0 * p[1]);
        let back = Field::from_bytes(&f.to_bytes()).unwrap();
        assert_eq!(f, back);
        assert!(Field::from_bytes(b"BWF2").is_err());
    }

    #[test]
    fn negated_index_negates_wavevector() {
        let g = BoxGrid::new(2, 16, 1.0).unwrap();
        for idx in 0..g.len() {
            if g.is_nyquist(idx) {
                continue;
            }
            let [a, b] = g.wavevector(idx);
            assert_eq!(g.wavevector(g.negated_index(idx)), [-a, -b]);
        }
    }
}
