//! Dyadic Riemann sums for the Young wave integral
//! `\int_0^t G_{t-r}(u_r dW_r)` and their Cauchy-in-level diagnostics.
//!
//! On the partition `t_k = k T / 2^n` the level-`n` sum at `t in (t_{m-1}, t_m]` is
//! `J^(n)_t = \sum_{k<m} G_{t - t_k}(u_{t_k} (W_{t_{k+1}} - W_{t_k}))`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{path_norm_profile, Mollifier, PathSpaceSpec, Summability};
use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, product_spectrum, BoxGrid, Field, SpectralField};
use crate::noise::{holder_besov_norm_unchecked, NoisePath};
use crate::stats::dyadic_rate_fit;
use crate::wave_kernel::{propagate_spectrum, rho};

/// Regular dyadic partition `{m T / 2^n : 0 <= m <= 2^n}` of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    horizon: f64,
    level: u32,
}

/// Finest supported partition level.
pub const MAX_LEVEL: u32 = 24;

impl DyadicPartition {
    pub fn new(horizon: f64, level: u32) -> Result<Self> {
        if !(horizon > 0.0 && horizon <= 1.0) {
            return Err(Error::ParamOutOfRange(format!("horizon {horizon} must lie in (0, 1]")));
        }
        if level > MAX_LEVEL {
            return Err(Error::ParamOutOfRange(format!("partition level {level} exceeds {MAX_LEVEL}")));
        }
        Ok(Self { horizon, level })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of intervals, `2^n`.
    pub fn intervals(&self) -> usize {
        1 << self.level
    }

    pub fn point(&self, m: usize) -> f64 {
        m as f64 * self.horizon / self.intervals() as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.intervals()).map(|m| self.point(m)).collect()
    }

    pub fn coarsened(&self, level: u32) -> Result<Self> {
        if level > self.level {
            return Err(Error::PartitionMismatch(format!(
                "cannot coarsen level {} to {level}",
                self.level
            )));
        }
        Self::new(self.horizon, level)
    }

    /// Index `m` with `t in (t_{m-1}, t_m]` (0 for `t = 0`).
    pub fn cell_of(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::ParamOutOfRange(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let m = (t * self.intervals() as f64 / self.horizon).ceil() as usize;
        // Guard against rounding in the division.
        let m = if m > 0 && self.point(m - 1) >= t { m - 1 } else { m };
        Ok(if self.point(m) < t { m + 1 } else { m })
    }

    /// Recognises times laid out exactly as a dyadic partition of `[0, T]`.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        let n = times.len().saturating_sub(1);
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::PartitionMismatch(format!(
                "{} time points do not form a dyadic partition",
                times.len()
            )));
        }
        let part = Self::new(times[n], n.trailing_zeros())?;
        let tol = 1e-12 * part.horizon;
        if times.iter().enumerate().any(|(m, t)| (t - part.point(m)).abs() > tol) {
            return Err(Error::PartitionMismatch("times are not equally spaced from 0".into()));
        }
        Ok(part)
    }
}

/// A space-time process sampled on a dyadic partition.
#[derive(Debug, Clone)]
pub struct ProcessPath {
    partition: DyadicPartition,
    values: Vec<Field>,
}

impl ProcessPath {
    pub fn new(partition: DyadicPartition, values: Vec<Field>) -> Result<Self> {
        if values.len() != partition.intervals() + 1 {
            return Err(Error::PartitionMismatch(format!(
                "{} values for {} partition points",
                values.len(),
                partition.intervals() + 1
            )));
        }
        let grid = *values[0].grid();
        if values.iter().any(|v| *v.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { partition, values })
    }

    pub fn from_fn(partition: DyadicPartition, f: impl Fn(f64) -> Result<Field> + Sync) -> Result<Self> {
        let values = partition
            .points()
            .par_iter()
            .map(|&t| f(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(partition, values)
    }

    pub fn zeros(partition: DyadicPartition, grid: BoxGrid) -> Self {
        Self { partition, values: vec![Field::zeros(grid); partition.intervals() + 1] }
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    pub fn values(&self) -> &[Field] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Field> {
        self.values
    }

    pub fn grid(&self) -> &BoxGrid {
        self.values[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.partition.points()
    }

    /// Value at the `m`-th point of the level-`level` sub-partition.
    pub fn at_level(&self, level: u32, m: usize) -> &Field {
        &self.values[m << (self.partition.level - level)]
    }

    /// The same process on the coarser level-`level` partition.
    pub fn restricted(&self, level: u32) -> Result<ProcessPath> {
        let partition = self.partition.coarsened(level)?;
        let values = (0..=partition.intervals()).map(|m| self.at_level(level, m).clone()).collect();
        Self::new(partition, values)
    }

    pub fn try_sub(&self, other: &ProcessPath) -> Result<ProcessPath> {
        self.combine(other, |a, b| a.try_sub(b))
    }

    pub fn try_add(&self, other: &ProcessPath) -> Result<ProcessPath> {
        self.combine(other, |a, b| a.try_add(b))
    }

    pub fn scaled(&self, c: f64) -> ProcessPath {
        ProcessPath { partition: self.partition, values: self.values.iter().map(|v| v.scaled(c)).collect() }
    }

    fn combine(&self, other: &ProcessPath, op: impl Fn(&Field, &Field) -> Result<Field>) -> Result<ProcessPath> {
        if self.partition != other.partition {
            return Err(Error::PartitionMismatch("paths live on different partitions".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(a, b)).collect::<Result<_>>()?;
        Self::new(self.partition, values)
    }

    /// `E^{gamma,kappa}` norm with `p = 2`, `q = inf`.
    pub fn norm(&self, spec: &PathSpaceSpec, m: &Mollifier) -> Result<f64> {
        crate::besov::path_norm(&self.times(), &self.values, spec, m)
    }
}

/// Checks that `u` and `w` both resolve the level-`n` partition of the same horizon.
fn shared_partition(u: &ProcessPath, w: &NoisePath, n: u32) -> Result<(DyadicPartition, DyadicPartition)> {
    let wp = DyadicPartition::from_times(w.times())?;
    let up = *u.partition();
    if (wp.horizon - up.horizon).abs() > 1e-12 * up.horizon {
        return Err(Error::PartitionMismatch(format!(
            "integrand horizon {} differs from noise horizon {}",
            up.horizon, wp.horizon
        )));
    }
    if n > up.level || n > wp.level {
        return Err(Error::PartitionMismatch(format!(
            "level {n} is finer than the integrand ({}) or noise ({}) partition",
            up.level, wp.level
        )));
    }
    if u.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    Ok((up, wp))
}

/// Spectra of `u_{t_k} (W_{t_{k+1}} - W_{t_k})` for every level-`n` interval.
fn increment_products(u: &ProcessPath, w: &NoisePath, n: u32, upto: usize) -> Result<Vec<SpectralField>> {
    let (_, wp) = shared_partition(u, w, n)?;
    let stride = 1usize << (wp.level - n);
    let slices = w.slices();
    (0..upto)
        .into_par_iter()
        .map(|k| {
            let dw = slices[(k + 1) * stride].try_sub(&slices[k * stride])?;
            product_spectrum(&forward_transform(u.at_level(n, k)), &forward_transform(&dw))
        })
        .collect()
}

fn pairwise_spectral_sum(mut terms: Vec<SpectralField>, grid: BoxGrid) -> SpectralField {
    if terms.is_empty() {
        return SpectralField::zeros(grid);
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.add_scaled(1.0, &b).expect("summands share a grid");
            }
            next.push(a);
        }
        terms = next;
    }
    terms.pop().expect("one term left")
}

/// The level-`n` Riemann sum `J^(n)_t`, evaluated term by term.
pub fn riemann_sum(u: &ProcessPath, w: &NoisePath, n: u32, t: f64) -> Result<Field> {
    let (up, _) = shared_partition(u, w, n)?;
    let part = up.coarsened(n)?;
    let m = part.cell_of(t)?;
    for k in 0..m {
        u.at_level(n, k).check_propagation(t - part.point(k))?;
    }
    let products = increment_products(u, w, n, m)?;
    let terms: Vec<SpectralField> = products
        .par_iter()
        .enumerate()
        .map(|(k, p)| propagate_spectrum(t - part.point(k), p))
        .collect();
    inverse_transform(&pairwise_spectral_sum(terms, *u.grid()))
}

/// `J^(n)` at every time in `eval` (sorted ascending), using the splitting
/// `sin((t - t_k) xi) = sin(t xi) cos(t_k xi) - cos(t xi) sin(t_k xi)` and
/// running sums over `k`, so the cost is one pass over the intervals.
pub fn riemann_sums_at(u: &ProcessPath, w: &NoisePath, n: u32, eval: &[f64]) -> Result<Vec<Field>> {
    let (up, _) = shared_partition(u, w, n)?;
    let part = up.coarsened(n)?;
    if eval.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::PartitionMismatch("evaluation times must be sorted".into()));
    }
    let cells = eval.iter().map(|&t| part.cell_of(t)).collect::<Result<Vec<_>>>()?;
    let upto = cells.iter().copied().max().unwrap_or(0);
    for (&t, &m) in eval.iter().zip(&cells) {
        for k in 0..m {
            u.at_level(n, k).check_propagation(t - part.point(k))?;
        }
    }
    let grid = *u.grid();
    let xi: Vec<f64> = (0..grid.len()).map(|i| grid.frequency_norm(i)).collect();
    let products = increment_products(u, w, n, upto)?;
    // Running sums C = sum cos(t_k xi) P_k / xi, S = sum sin(t_k xi) P_k / xi;
    // at xi = 0 they hold sum P_k and sum t_k P_k.
    let zero = Complex64::new(0.0, 0.0);
    let mut c = vec![zero; grid.len()];
    let mut s = vec![zero; grid.len()];
    let mut done = 0usize;
    let mut out = Vec::with_capacity(eval.len());
    for (&t, &m) in eval.iter().zip(&cells) {
        while done < m {
            let tk = part.point(done);
            let p = products[done].coeffs();
            c.par_iter_mut().zip(s.par_iter_mut()).enumerate().for_each(|(i, (ci, si))| {
                if xi[i] == 0.0 {
                    *ci += p[i];
                    *si += p[i] * tk;
                } else {
                    let (sn, cs) = (tk * xi[i]).sin_cos();
                    *ci += p[i] * (cs / xi[i]);
                    *si += p[i] * (sn / xi[i]);
                }
            });
            done += 1;
        }
        let coeffs: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                if xi[i] == 0.0 {
                    c[i] * t - s[i]
                } else {
                    let (sn, cs) = (t * xi[i]).sin_cos();
                    c[i] * sn - s[i] * cs
                }
            })
            .collect();
        out.push(SpectralField::new(grid, coeffs)?);
    }
    out.par_iter().map(inverse_transform).collect()
}

/// Exponent tuple `(kappa, alpha, gamma, theta, p)` governing the integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub kappa: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    pub p: f64,
}

impl Exponents {
    /// The conditions under which the Riemann sums converge, returned as the
    /// list of violated inequalities (empty when all hold).
    pub fn violations(&self, dim: usize) -> Vec<String> {
        let Exponents { kappa, alpha, gamma, theta, p } = *self;
        let d = dim as f64;
        let mut v = Vec::new();
        for (name, x) in [("kappa", kappa), ("alpha", alpha), ("gamma", gamma), ("theta", theta)] {
            if !(0.0..=1.0).contains(&x) {
                v.push(format!("{name} = {x} outside [0, 1]"));
            }
        }
        let lhs = kappa + alpha + gamma + (1.0 - rho(dim));
        if !(lhs < theta) {
            v.push(format!("kappa + alpha + gamma + 1 - rho_d = {lhs} must be < theta = {theta}"));
        }
        if !(gamma + theta > 1.0) {
            v.push(format!("gamma + theta = {} must exceed 1", gamma + theta));
        }
        if !(kappa > alpha + d / p) {
            v.push(format!("kappa = {kappa} must exceed alpha + d/p = {}", alpha + d / p));
        }
        if !(gamma < 1.0 - (d + 1.0) / p) {
            v.push(format!("gamma = {gamma} must be < 1 - (d+1)/p = {}", 1.0 - (d + 1.0) / p));
        }
        v
    }
}

/// Settings of the Cauchy diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungOptions {
    /// Level of the dyadic grid on which `J^(n)` is compared across `n`.
    pub eval_level: u32,
    /// Exponent of the time integral in the boundedness diagnostic.
    pub q: f64,
    /// Exponents used for the admissibility warning and the noise norm.
    pub exponents: Option<Exponents>,
}

impl Default for YoungOptions {
    fn default() -> Self {
        Self { eval_level: 6, q: 8.0, exponents: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub n: u32,
    pub d_n: f64,
    /// `log2(d_n / d_{n+1})`, absent on the last row.
    pub local_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub rows: Vec<CauchyRow>,
    pub epsilon_fit: Option<f64>,
    pub c_fit: Option<f64>,
    pub r_squared: Option<f64>,
    pub converged: bool,
    pub finest_level: u32,
    /// `||J||_E / (||W||_{C^theta B^{-alpha}} (\int_0^T ||u||_{E[0,r]}^q dr)^{1/q})`.
    pub boundedness_ratio: Option<f64>,
    /// Violated exponent conditions, if any were supplied.
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct CauchySummary {
    epsilon_fit: Option<f64>,
    #[serde(rename = "C_fit")]
    c_fit: Option<f64>,
    converged: bool,
}

impl CauchyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,d_n,local_rate\n");
        for r in &self.rows {
            let rate = r.local_rate.map(|v| format!("{v:.12e}")).unwrap_or_default();
            s.push_str(&format!("{},{:.12e},{}\n", r.n, r.d_n, rate));
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let summary = CauchySummary { epsilon_fit: self.epsilon_fit, c_fit: self.c_fit, converged: self.converged };
        serde_json::to_string_pretty(&summary).expect("plain data serializes")
    }

    pub fn differences(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d_n).collect()
    }
}

fn eval_partition(u: &ProcessPath, opts: &YoungOptions) -> Result<DyadicPartition> {
    DyadicPartition::new(u.partition().horizon(), opts.eval_level)
}

/// Fills rows, local rates and the dyadic fit from `(n, d_n)` pairs.
fn report_from(diffs: &[(u32, f64)], converged: bool, finest: u32, warnings: Vec<String>) -> CauchyReport {
    let rows: Vec<CauchyRow> = diffs
        .iter()
        .enumerate()
        .map(|(i, &(n, d))| CauchyRow {
            n,
            d_n: d,
            local_rate: diffs.get(i + 1).map(|&(_, next)| (d / next).log2()),
        })
        .collect();
    let levels: Vec<f64> = diffs.iter().map(|(n, _)| *n as f64).collect();
    let ds: Vec<f64> = diffs.iter().map(|(_, d)| *d).collect();
    let fit = dyadic_rate_fit(&levels, &ds);
    CauchyReport {
        rows,
        epsilon_fit: fit.map(|f| f.0),
        c_fit: fit.map(|f| f.1),
        r_squared: fit.map(|f| f.2),
        converged,
        finest_level: finest,
        boundedness_ratio: None,
        warnings,
    }
}

/// Sequence of Riemann sums `J^(n)`, `n_min <= n <= n_max`, on the evaluation
/// grid, stopping at the first `n` with `||J^(n+1) - J^(n)||_E < tol`.
/// Returns `J` at the finest level reached and the Cauchy report.
#[allow(clippy::too_many_arguments)]
pub fn young_integral(
    u: &ProcessPath,
    w: &NoisePath,
    n_min: u32,
    n_max: u32,
    spec: &PathSpaceSpec,
    tol: f64,
    opts: &YoungOptions,
    m: &Mollifier,
) -> Result<(ProcessPath, CauchyReport)> {
    if n_min > n_max {
        return Err(Error::ParamOutOfRange(format!("n_min = {n_min} exceeds n_max = {n_max}")));
    }
    shared_partition(u, w, n_max)?;
    let eval = eval_partition(u, opts)?;
    let times = eval.points();
    let warnings = opts.exponents.map(|e| e.violations(u.grid().dim())).unwrap_or_default();
    let mut current = riemann_sums_at(u, w, n_min, &times)?;
    let mut diffs: Vec<(u32, f64)> = Vec::new();
    let mut converged = false;
    let mut finest = n_min;
    let mut rising = 0;
    for n in n_min..n_max {
        let next = riemann_sums_at(u, w, n + 1, &times)?;
        let delta: Vec<Field> = next.iter().zip(&current).map(|(a, b)| a.try_sub(b)).collect::<Result<_>>()?;
        let d = crate::besov::path_norm(&times, &delta, spec, m)?;
        if let Some(&(_, prev)) = diffs.last() {
            rising = if d > prev { rising + 1 } else { 0 };
        }
        diffs.push((n, d));
        current = next;
        finest = n + 1;
        if rising >= 3 {
            let levels = diffs.iter().rev().take(4).map(|(n, _)| *n).rev().collect();
            return Err(Error::NotConverging { levels });
        }
        if d < tol {
            converged = true;
            break;
        }
    }
    let report = report_from(&diffs, converged, finest, warnings);
    Ok((ProcessPath::new(eval, current)?, report))
}

/// Cauchy table over `n_range` (every level is computed), plus the
/// boundedness ratio of the finest sum against the noise and integrand norms.
pub fn cauchy_report(
    u: &ProcessPath,
    w: &NoisePath,
    n_range: std::ops::RangeInclusive<u32>,
    spec: &PathSpaceSpec,
    opts: &YoungOptions,
    m: &Mollifier,
) -> Result<CauchyReport> {
    let (n_min, n_max) = (*n_range.start(), *n_range.end());
    let (j, mut report) = young_integral(u, w, n_min, n_max, spec, 0.0, opts, m)?;
    if let Some(e) = opts.exponents {
        let jn = j.norm(spec, m)?;
        // Noise norm on the evaluation grid (or the noise grid, if coarser).
        let wp = DyadicPartition::from_times(w.times())?;
        let level = opts.eval_level.min(wp.level());
        let stride = 1usize << (wp.level() - level);
        let w_times: Vec<f64> = w.times().iter().step_by(stride).copied().collect();
        let w_slices: Vec<Field> = w.slices().iter().step_by(stride).cloned().collect();
        let wn = holder_besov_norm_unchecked(&w_times, &w_slices, e.theta, e.alpha, e.p, m)?;
        let ue = u.restricted(opts.eval_level.min(u.partition().level()))?;
        let times = ue.times();
        let profile = path_norm_profile(&times, ue.values(), spec, m, 2.0, Summability::Sup)?;
        // Norm of u on [0, r] is the running maximum of both terms.
        let mut run = (0.0f64, 0.0f64);
        let prefix: Vec<f64> = profile
            .iter()
            .map(|(a, b)| {
                run = (run.0.max(*a), run.1.max(*b));
                run.0 + run.1
            })
            .collect();
        let dt = times[1] - times[0];
        let integral: f64 = prefix.windows(2).map(|p| 0.5 * (p[0].powf(opts.q) + p[1].powf(opts.q)) * dt).sum();
        let den = wn * integral.powf(1.0 / opts.q);
        if den > 0.0 {
            report.boundedness_ratio = Some(jn / den);
        }
    }
    Ok(report)
}
