//! Littlewood–Paley blocks and weighted Besov norms.
//!
//! A [`Mollifier`] fixes a radial `phi0` supported in the unit ball with
//! `\int phi0 = 1` and the companion `phi(x) = phi0(x) - 2^{-d} phi0(x/2)`.
//! Block `j = 0` filters with `phi0`, block `j >= 1` with
//! `phi_j = 2^{dj} phi(2^j .)`; both are applied as Fourier multipliers, so
//! the dilation is exact and `\sum_{j <= J}` of the blocks is the low-pass
//! filter `phi0^(2^{-J} xi)`.
//!
//! The norm of `f` in `B^{s, w}_{p,q}` is the `l^q` sum over `0 <= j <= j_max`
//! of `2^{js} ||phi_j * f||_{L^p_w}`; levels above `j_max` are not resolved by
//! the grid and are dropped.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, pairwise_sum, BoxGrid, Field, SpectralField};
use crate::quadrature::GaussLegendre;

/// Default upper bound on exponential weight parameters.
pub const DEFAULT_MU_STAR: f64 = 4.0;

/// Default number of vanishing moments of `phi`.
pub const DEFAULT_MOMENT_ORDER: u32 = 2;

const MOMENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "mu", rename_all = "snake_case")]
pub enum Weight {
    /// `e^{-mu |x|}`.
    Exponential(f64),
    /// `(1 + |x|^{d+1})^{-1}`.
    Polynomial,
}

impl Weight {
    /// Exponential weight with `mu` checked against `[0, mu_star]`.
    pub fn exponential(mu: f64, mu_star: f64) -> Result<Weight> {
        let w = Weight::Exponential(mu);
        w.validate(mu_star)?;
        Ok(w)
    }

    pub fn validate(&self, mu_star: f64) -> Result<()> {
        match *self {
            Weight::Exponential(mu) if !(0.0..=mu_star).contains(&mu) => Err(Error::ParamOutOfRange(
                format!("weight parameter mu = {mu} must lie in [0, {mu_star}]"),
            )),
            _ => Ok(()),
        }
    }

    pub fn value(&self, dim: usize, radius: f64) -> f64 {
        match *self {
            Weight::Exponential(mu) => (-mu * radius).exp(),
            Weight::Polynomial => 1.0 / (1.0 + radius.powi(dim as i32 + 1)),
        }
    }

    /// Weight sampled at every grid point.
    pub fn table(&self, grid: &BoxGrid) -> Vec<f64> {
        if let Weight::Exponential(mu) = *self {
            if mu == 0.0 {
                return vec![1.0; grid.len()];
            }
        }
        (0..grid.len()).map(|i| self.value(grid.dim(), grid.radius(i))).collect()
    }
}

/// Outer summation index of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Finite(f64),
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: Summability,
    pub weight: Weight,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: Summability, weight: Weight) -> Result<Self> {
        if !(s <= 1.0) {
            return Err(Error::ParamOutOfRange(format!("smoothness s = {s} must be <= 1")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::ParamOutOfRange(format!("integrability p = {p} must lie in (1, inf)")));
        }
        if let Summability::Finite(q) = q {
            if !(q > 1.0 && q.is_finite()) {
                return Err(Error::ParamOutOfRange(format!("summability q = {q} must lie in (1, inf]")));
            }
        }
        Ok(Self { s, p, q, weight })
    }

    /// Same spec with another smoothness index (not range-checked, so negative
    /// and super-unit indices are available to the verifiers).
    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }

    pub fn with_weight(&self, weight: Weight) -> Self {
        Self { weight, ..*self }
    }
}

/// Parameters of the path-space norm: Hölder exponent `gamma`, spatial
/// smoothness `kappa`, and the time-dependent weight `mu_t = a + b t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpaceSpec {
    pub gamma: f64,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub horizon: f64,
}

impl PathSpaceSpec {
    pub fn new(gamma: f64, kappa: f64, a: f64, b: f64, horizon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::ParamOutOfRange(format!("gamma = {gamma} must lie in [0, 1]")));
        }
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::ParamOutOfRange(format!("kappa = {kappa} must lie in [0, 1]")));
        }
        if !(a >= 0.0) || !(b > 0.0) {
            return Err(Error::ParamOutOfRange(format!("weight schedule needs a >= 0, b > 0 (got {a}, {b})")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::ParamOutOfRange(format!("horizon {horizon} must be positive")));
        }
        Ok(Self { gamma, kappa, a, b, horizon })
    }

    /// Spec with the default schedule `mu_t = 1 + t`.
    pub fn with_default_schedule(gamma: f64, kappa: f64, horizon: f64) -> Result<Self> {
        Self::new(gamma, kappa, 1.0, 1.0, horizon)
    }

    pub fn mu_at(&self, t: f64) -> f64 {
        self.a + self.b * t
    }
}

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Moment-corrected radial bump `c * b(r) * (1 + \sum_i a_i r^{2i})`.
#[derive(Debug, Clone)]
struct RadialBump {
    poly: Vec<f64>,
    scale: f64,
}

impl RadialBump {
    fn eval_r2(&self, r2: f64) -> f64 {
        let b = bump(r2);
        if b == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for c in self.poly.iter().rev() {
            acc = acc * r2 + c;
        }
        self.scale * b * (1.0 + r2 * acc)
    }
}

/// Fourier transform of a radial function supported in the unit ball,
/// evaluated through its one-dimensional projection
/// `A(x_1) = \int phi0(x_1, x_2) dx_2`, so that `phi0^(eta) = \int A(x) cos(eta x) dx`.
#[derive(Debug, Clone)]
struct RadialTransform {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
}

impl RadialTransform {
    fn new(profile: &RadialBump, dim: usize, max_frequency: f64) -> Self {
        let order = (96.0 + max_frequency.max(0.0)).ceil() as usize;
        let rule = GaussLegendre::new(order);
        let inner = GaussLegendre::new(64);
        let mut nodes = Vec::with_capacity(order);
        let mut weighted = Vec::with_capacity(order);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            // Nodes mapped to [0, 1]; the factor 2 accounts for evenness.
            let x1 = 0.5 * (x + 1.0);
            let projection = if dim == 1 {
                profile.eval_r2(x1 * x1)
            } else {
                let top = (1.0 - x1 * x1).max(0.0).sqrt();
                2.0 * inner.integrate(0.0, top, |y| profile.eval_r2(x1 * x1 + y * y))
            };
            nodes.push(x1);
            weighted.push(w * projection);
        }
        let mut t = Self { nodes, weighted };
        let total = t.eval(0.0);
        for v in &mut t.weighted {
            *v /= total;
        }
        t
    }

    fn eval(&self, eta: f64) -> f64 {
        self.nodes.iter().zip(&self.weighted).map(|(x, w)| w * (eta * x).cos()).sum()
    }
}

/// Littlewood–Paley mollifier pair on a fixed target grid.
#[derive(Debug, Clone)]
pub struct Mollifier {
    grid: BoxGrid,
    moment_order: u32,
    j_max: i32,
    phi0: Field,
    phi: Field,
    transform: RadialTransform,
    multipliers: Vec<Vec<f64>>,
}

/// Surface measure of the unit sphere in `R^d` (`2` for `d = 1`).
fn sphere_area(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * std::f64::consts::PI
    }
}

/// `\int_0^R rho^k g(rho) d rho` by a high-order rule; the bump profiles are
/// flat at the edge of their support, so Gauss–Legendre converges fast.
fn radial_integral(upper: f64, k: i32, g: impl Fn(f64) -> f64) -> f64 {
    crate::quadrature::composite(0.0, upper, 8, 48, |rho| rho.powi(k) * g(rho))
}

/// Largest level whose block is resolved on `grid`: `floor(log2(nyquist)) - 2`.
pub fn resolvable_levels(grid: &BoxGrid) -> i32 {
    grid.nyquist().log2().floor() as i32 - 2
}

impl Mollifier {
    pub fn new(moment_order: u32, grid: BoxGrid) -> Result<Self> {
        if moment_order < 1 {
            return Err(Error::ParamOutOfRange("moment order must be >= 1".into()));
        }
        if 2.0 / grid.spacing() < 16.0 {
            return Err(Error::InvalidGrid(format!(
                "grid spacing {} resolves the unit ball with fewer than 16 points",
                grid.spacing()
            )));
        }
        let j_max = resolvable_levels(&grid);
        if j_max < 0 {
            return Err(Error::InvalidGrid("grid resolves no dyadic level".into()));
        }
        let dim = grid.dim();
        let d = dim as i32;

        // For a radial function every monomial moment is an angular constant
        // times a radial moment, and odd moments vanish; it suffices to kill
        // the radial moments of even order 2..=L.
        let unknowns = (moment_order / 2) as usize;
        let mut poly = vec![0.0; unknowns];
        if unknowns > 0 {
            let b = |rho: f64| bump(rho * rho);
            let mut a = DMatrix::<f64>::zeros(unknowns, unknowns);
            let mut rhs = DVector::<f64>::zeros(unknowns);
            for row in 0..unknowns {
                let k = 2 * (row as i32 + 1) + d - 1;
                rhs[row] = -radial_integral(1.0, k, b);
                for col in 0..unknowns {
                    a[(row, col)] = radial_integral(1.0, k + 2 * (col as i32 + 1), b);
                }
            }
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            if !(smin > 1e-13 * smax) {
                return Err(Error::MomentSolveFailed(format!(
                    "moment system is singular at order {moment_order} (condition {:.3e})",
                    smax / smin
                )));
            }
            let sol = svd
                .solve(&rhs, 0.0)
                .map_err(|e| Error::MomentSolveFailed(e.to_string()))?;
            poly = sol.iter().copied().collect();
        }
        let mut profile = RadialBump { poly, scale: 1.0 };
        let mass = sphere_area(dim) * radial_integral(1.0, d - 1, |rho| profile.eval_r2(rho * rho));
        if !(mass.abs() > 1e-6) {
            return Err(Error::MomentSolveFailed("corrected bump has vanishing integral".into()));
        }
        profile.scale = 1.0 / mass;
        check_moments(&profile, dim, moment_order)?;

        let phi0 = Field::from_fn(grid, |p| profile.eval_r2(p[0] * p[0] + p[1] * p[1]));
        let dilate = 2f64.powi(-d);
        let phi = Field::from_fn(grid, |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            profile.eval_r2(r2) - dilate * profile.eval_r2(r2 / 4.0)
        });
        if !(crate::grid::integrate(&phi0).abs() > 1e-6) {
            return Err(Error::MomentSolveFailed("sampled phi0 has vanishing integral".into()));
        }

        let max_frequency = (0..grid.len()).map(|i| grid.frequency_norm(i)).fold(0.0, f64::max);
        let transform = RadialTransform::new(&profile, dim, max_frequency);
        let multipliers = build_multipliers(&grid, &transform, j_max);
        Ok(Self { grid, moment_order, j_max, phi0, phi, transform, multipliers })
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn moment_order(&self) -> u32 {
        self.moment_order
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// `phi0` sampled on the target grid.
    pub fn phi0(&self) -> &Field {
        &self.phi0
    }

    /// `phi` sampled on the target grid.
    pub fn phi(&self) -> &Field {
        &self.phi
    }

    /// Continuum Fourier transform of `phi0` at radial frequency `eta`.
    pub fn phi0_hat(&self, eta: f64) -> f64 {
        self.transform.eval(eta)
    }

    /// Multiplier of block `j` at radial frequency `xi`.
    pub fn block_symbol(&self, j: i32, xi: f64) -> f64 {
        if j == 0 {
            self.phi0_hat(xi)
        } else {
            let s = 2f64.powi(-j);
            self.phi0_hat(s * xi) - self.phi0_hat(2.0 * s * xi)
        }
    }

    /// Multiplier table of block `j`, indexed like the spectrum.
    pub fn multiplier(&self, j: i32) -> Result<&[f64]> {
        if j < 0 || j > self.j_max {
            return Err(Error::LevelOutOfRange { level: j, max: self.j_max });
        }
        Ok(&self.multipliers[j as usize])
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        0..=self.j_max
    }

    fn check_grid(&self, f: &Field) -> Result<()> {
        if f.grid() == &self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Radial moments `\int |x|^k phi` for `k <= L` must vanish (`k >= 1` for
/// `phi0`); every monomial moment is bounded by the sphere area times these.
fn check_moments(profile: &RadialBump, dim: usize, order: u32) -> Result<()> {
    let d = dim as i32;
    let dilate = 2f64.powi(-d);
    let phi = |rho: f64| profile.eval_r2(rho * rho) - dilate * profile.eval_r2(rho * rho / 4.0);
    let phi0 = |rho: f64| profile.eval_r2(rho * rho);
    for k in (0..=order as i32).step_by(2) {
        let m_phi = sphere_area(dim) * radial_integral(2.0, k + d - 1, phi);
        let m_phi0 = if k == 0 { 0.0 } else { sphere_area(dim) * radial_integral(1.0, k + d - 1, phi0) };
        let worst = m_phi.abs().max(m_phi0.abs());
        if worst > MOMENT_TOLERANCE {
            return Err(Error::MomentSolveFailed(format!(
                "radial moment of order {k} is {worst:.3e} after correction"
            )));
        }
    }
    Ok(())
}

fn build_multipliers(grid: &BoxGrid, transform: &RadialTransform, j_max: i32) -> Vec<Vec<f64>> {
    // Radial symbols only depend on the integer |k|^2.
    let mut keys: Vec<u64> = (0..grid.len()).map(|i| grid.wavenumber_sq(i)).collect();
    keys.sort_unstable();
    keys.dedup();
    let dxi = grid.frequency_spacing();
    let levels = j_max as usize + 1;
    let rows: Vec<Vec<f64>> = keys
        .par_iter()
        .map(|&k2| {
            let xi = (k2 as f64).sqrt() * dxi;
            // Entry i holds phi0^(2^{-i} xi).
            (0..levels).map(|i| transform.eval(xi * 2f64.powi(-(i as i32)))).collect()
        })
        .collect();
    let lookup: HashMap<u64, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let row_of: Vec<usize> = (0..grid.len()).map(|i| lookup[&grid.wavenumber_sq(i)]).collect();
    (0..levels)
        .map(|j| {
            row_of
                .iter()
                .map(|&r| {
                    let v = &rows[r];
                    if j == 0 {
                        v[0]
                    } else {
                        v[j] - v[j - 1]
                    }
                })
                .collect()
        })
        .collect()
}

/// Spectrum of block `j` of a field whose spectrum is already known.
pub fn block_spectrum(spec: &SpectralField, j: i32, m: &Mollifier) -> Result<SpectralField> {
    if spec.grid() != m.grid() {
        return Err(Error::GridMismatch);
    }
    let mult = m.multiplier(j)?;
    Ok(spec.apply_multiplier(|i| mult[i]))
}

/// `phi_j * f`.
pub fn lp_block(f: &Field, j: i32, m: &Mollifier) -> Result<Field> {
    m.check_grid(f)?;
    inverse_transform(&block_spectrum(&forward_transform(f), j, m)?)
}

/// All blocks `0..=j_max` of `f` (one forward transform).
pub fn lp_blocks(f: &Field, m: &Mollifier) -> Result<Vec<Field>> {
    m.check_grid(f)?;
    let spec = forward_transform(f);
    m.levels()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| inverse_transform(&block_spectrum(&spec, j, m)?))
        .collect()
}

#[inline]
fn abs_pow(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else if p.fract() == 0.0 && p <= 64.0 {
        v.abs().powi(p as i32)
    } else {
        v.abs().powf(p)
    }
}

/// `(\sum |f|^p w h^d)^{1/p}` against a precomputed weight table; `p = inf`
/// gives the weighted supremum `max |f| w`.
pub fn weighted_lp_norm_table(samples: &[f64], p: f64, weights: &[f64], cell_volume: f64) -> f64 {
    if p.is_infinite() {
        return samples.iter().zip(weights).fold(0.0, |m, (v, w)| m.max(v.abs() * w));
    }
    let terms: Vec<f64> = samples.iter().zip(weights).map(|(v, w)| abs_pow(*v, p) * w).collect();
    (pairwise_sum(&terms) * cell_volume).powf(1.0 / p)
}

pub fn weighted_lp_norm(f: &Field, p: f64, w: Weight) -> f64 {
    let table = w.table(f.grid());
    weighted_lp_norm_table(f.samples(), p, &table, f.grid().cell_volume())
}

/// `||phi_j * f||_{L^p_w}` for every resolved level `j`.
pub fn besov_block_norms(f: &Field, p: f64, weight: Weight, m: &Mollifier) -> Result<Vec<f64>> {
    let table = weight.table(f.grid());
    let h_d = f.grid().cell_volume();
    Ok(lp_blocks(f, m)?
        .iter()
        .map(|b| weighted_lp_norm_table(b.samples(), p, &table, h_d))
        .collect())
}

/// Combines block norms `b_j` into `(\sum (2^{js} b_j)^q)^{1/q}` or the sup.
pub fn combine_levels(block_norms: &[f64], s: f64, q: Summability) -> f64 {
    let scaled = block_norms.iter().enumerate().map(|(j, b)| 2f64.powf(j as f64 * s) * b);
    match q {
        Summability::Sup => scaled.fold(0.0, f64::max),
        Summability::Finite(q) => {
            let terms: Vec<f64> = scaled.map(|v| v.powf(q)).collect();
            pairwise_sum(&terms).powf(1.0 / q)
        }
    }
}

pub fn besov_norm(f: &Field, spec: &BesovSpec, m: &Mollifier) -> Result<f64> {
    let blocks = besov_block_norms(f, spec.p, spec.weight, m)?;
    Ok(combine_levels(&blocks, spec.s, spec.q))
}

/// Path-space norm
/// `sup_s ||u_s||_{B^{kappa, mu_s}_{p,q}} + sup_{s<t} ||u_t - u_s||_{B^{kappa, mu_t}_{p,q}} / (t-s)^gamma`
/// over the given time points (ordered pairs, weight at the later time).
pub fn path_norm_with(
    times: &[f64],
    values: &[Field],
    spec: &PathSpaceSpec,
    m: &Mollifier,
    p: f64,
    q: Summability,
) -> Result<f64> {
    let (sup_term, holder_term) = path_norm_terms(times, values, spec, m, p, q)?;
    Ok(sup_term + holder_term)
}

/// [`path_norm_with`] with `p = 2`, `q = inf`.
pub fn path_norm(times: &[f64], values: &[Field], spec: &PathSpaceSpec, m: &Mollifier) -> Result<f64> {
    path_norm_with(times, values, spec, m, 2.0, Summability::Sup)
}

/// The supremum and Hölder terms of the path norm, separately.
pub fn path_norm_terms(
    times: &[f64],
    values: &[Field],
    spec: &PathSpaceSpec,
    m: &Mollifier,
    p: f64,
    q: Summability,
) -> Result<(f64, f64)> {
    let profile = path_norm_profile(times, values, spec, m, p, q)?;
    Ok(profile.iter().fold((0.0, 0.0), |(a, b), (s, h)| (f64::max(a, *s), f64::max(b, *h))))
}

/// Per-time contributions to the path norm: entry `i` holds
/// `||u_{t_i}||` and `max_{s<t_i} ||u_{t_i} - u_s|| / (t_i - s)^gamma`.
/// Running maxima give the norm restricted to `[0, t_i]`.
pub fn path_norm_profile(
    times: &[f64],
    values: &[Field],
    spec: &PathSpaceSpec,
    m: &Mollifier,
    p: f64,
    q: Summability,
) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyPath);
    }
    if times.len() != values.len() {
        return Err(Error::PartitionMismatch(format!(
            "{} times for {} values",
            times.len(),
            values.len()
        )));
    }
    let blocks: Vec<Vec<Field>> = values.par_iter().map(|v| lp_blocks(v, m)).collect::<Result<_>>()?;
    let grid = *m.grid();
    let h_d = grid.cell_volume();
    let kappa = spec.kappa;
    let weights: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| Weight::Exponential(spec.mu_at(t)).table(&grid))
        .collect();
    let norm_of = |levels: &dyn Fn(usize) -> Vec<f64>, w: &[f64]| -> f64 {
        let b: Vec<f64> = (0..blocks[0].len())
            .map(|j| weighted_lp_norm_table(&levels(j), p, w, h_d))
            .collect();
        combine_levels(&b, kappa, q)
    };
    Ok((0..times.len())
        .into_par_iter()
        .map(|ti| {
            let own = norm_of(&|j| blocks[ti][j].samples().to_vec(), &weights[ti]);
            let mut best = 0.0_f64;
            for si in 0..ti {
                let gap = (times[ti] - times[si]).abs();
                let diff = |j: usize| -> Vec<f64> {
                    blocks[ti][j]
                        .samples()
                        .iter()
                        .zip(blocks[si][j].samples())
                        .map(|(a, b)| a - b)
                        .collect()
                };
                best = best.max(norm_of(&diff, &weights[ti]) / gap.powf(spec.gamma));
            }
            (own, best)
        })
        .collect())
}

/// Exponents of a product estimate `||f g||_{B^{-alpha, mu}_{p,inf}} <=
/// C ||f||_{B^{-alpha, mu1}_{p1,inf}} ||g||_{B^{beta, mu2}_{p2,inf}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub mu: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl ProductParams {
    pub fn validate(&self, mu_star: f64) -> Result<()> {
        let viol = |s: String| Err(Error::ParamConstraintViolated(s));
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return viol(format!("{name} = {v} must lie in (0, 1]"));
            }
        }
        if !(self.alpha < self.beta) {
            return viol(format!("alpha < beta fails ({} >= {})", self.alpha, self.beta));
        }
        for (name, v) in [("p", self.p), ("p1", self.p1), ("p2", self.p2)] {
            if !(v > 1.0 && v.is_finite()) {
                return viol(format!("{name} = {v} must lie in (1, inf)"));
            }
        }
        for (name, v) in [("mu", self.mu), ("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(0.0..=mu_star).contains(&v) {
                return viol(format!("{name} = {v} must lie in [0, {mu_star}]"));
            }
        }
        let lhs = 1.0 / self.p;
        let rhs = 1.0 / self.p1 + 1.0 / self.p2;
        if (lhs - rhs).abs() > 1e-12 {
            return viol(format!("1/p = 1/p1 + 1/p2 fails ({lhs} vs {rhs})"));
        }
        let lhs = self.mu / self.p;
        let rhs = self.mu1 / self.p1 + self.mu2 / self.p2;
        if (lhs - rhs).abs() > 1e-12 {
            return viol(format!("mu/p = mu1/p1 + mu2/p2 fails ({lhs} vs {rhs})"));
        }
        Ok(())
    }
}

/// Ratio of the two sides of the product estimate for a given pair of fields
/// (zero when `f g` vanishes).
pub fn check_product_bound(f: &Field, g: &Field, params: &ProductParams, m: &Mollifier) -> Result<f64> {
    check_product_bound_with(f, g, params, m, DEFAULT_MU_STAR)
}

pub fn check_product_bound_with(
    f: &Field,
    g: &Field,
    params: &ProductParams,
    m: &Mollifier,
    mu_star: f64,
) -> Result<f64> {
    params.validate(mu_star)?;
    let prod = crate::grid::product(f, g)?;
    let lhs = combine_levels(
        &besov_block_norms(&prod, params.p, Weight::Exponential(params.mu), m)?,
        -params.alpha,
        Summability::Sup,
    );
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let nf = combine_levels(
        &besov_block_norms(f, params.p1, Weight::Exponential(params.mu1), m)?,
        -params.alpha,
        Summability::Sup,
    );
    let ng = combine_levels(
        &besov_block_norms(g, params.p2, Weight::Exponential(params.mu2), m)?,
        params.beta,
        Summability::Sup,
    );
    Ok(lhs / (nf * ng))
}

/// `||f||_{B^s}` divided by the interpolation bound
/// `||f||_{B^{s0}}^{1-theta} ||f||_{B^{s1}}^theta` with `s = (1-theta)s0 + theta s1`,
/// all with `q = inf`. Never exceeds one beyond rounding.
pub fn interpolation_ratio(f: &Field, s0: f64, s1: f64, theta: f64, p: f64, weight: Weight, m: &Mollifier) -> Result<f64> {
    let b = besov_block_norms(f, p, weight, m)?;
    let s = (1.0 - theta) * s0 + theta * s1;
    let mid = combine_levels(&b, s, Summability::Sup);
    if mid == 0.0 {
        return Ok(0.0);
    }
    let lo = combine_levels(&b, s0, Summability::Sup);
    let hi = combine_levels(&b, s1, Summability::Sup);
    Ok(mid / (lo.powf(1.0 - theta) * hi.powf(theta)))
}

/// Largest value over `mus` of `mu^{(d+1)/p} ||f||_{B^{s, w_mu}} / ||f||_{B^{s, P}}`,
/// the constant in the exponential-to-polynomial weight comparison.
pub fn weight_change_constant(f: &Field, s: f64, p: f64, q: Summability, mus: &[f64], m: &Mollifier) -> Result<f64> {
    let d = f.grid().dim() as f64;
    let poly = combine_levels(&besov_block_norms(f, p, Weight::Polynomial, m)?, s, q);
    if poly == 0.0 {
        return Ok(0.0);
    }
    let mut best = 0.0_f64;
    for &mu in mus {
        let e = combine_levels(&besov_block_norms(f, p, Weight::Exponential(mu), m)?, s, q);
        best = best.max(mu.powf((d + 1.0) / p) * e / poly);
    }
    Ok(best)
}

/// `||f||_{B^{kappa', mu'}_{p',inf}} / ||f||_{B^{kappa, mu}_{p,inf}}` with
/// `kappa = kappa' + d(1/p - 1/p')` and `mu' = (p'/p) mu`.
pub fn embedding_ratio(f: &Field, kappa_prime: f64, p: f64, p_prime: f64, mu: f64, m: &Mollifier) -> Result<f64> {
    if !(p_prime >= p) {
        return Err(Error::ParamOutOfRange(format!("embedding needs p' >= p (got {p_prime} < {p})")));
    }
    let d = f.grid().dim() as f64;
    let kappa = kappa_prime + d * (1.0 / p - 1.0 / p_prime);
    let mu_prime = p_prime / p * mu;
    let den = combine_levels(&besov_block_norms(f, p, Weight::Exponential(mu), m)?, kappa, Summability::Sup);
    if den == 0.0 {
        return Ok(0.0);
    }
    let num = combine_levels(
        &besov_block_norms(f, p_prime, Weight::Exponential(mu_prime), m)?,
        kappa_prime,
        Summability::Sup,
    );
    Ok(num / den)
}
