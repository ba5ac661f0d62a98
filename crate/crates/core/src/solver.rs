//! Mild solutions of `u_tt = Laplacian u + u dW/dt` by Picard iteration at a
//! fixed dyadic level, and the constructive choice of admissible exponents.
//!
//! The mild form is `u_t = (d/dt G)_t u0 + G_t u1 + \int_0^t G_{t-r}(u_r dW_r)`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::besov::{Mollifier, PathSpaceSpec};
use crate::error::{Error, Result};
use crate::grid::{forward_transform, pairwise_sum, BoxGrid, Field};
use crate::noise::NoisePath;
use crate::wave_kernel::{apply_dtg, apply_g, rho};
use crate::young::{riemann_sums_at, DyadicPartition, Exponents, ProcessPath};

/// Sobolev norm `(\sum (1 + |xi|^2)^s |f^(xi)|^2 dxi / (2 pi)^d)^{1/2}` on the
/// frequency lattice of the box.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let grid = *f.grid();
    let spec = forward_transform(f);
    let terms: Vec<f64> = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let xi = grid.frequency_norm(i);
            (1.0 + xi * xi).powf(s) * c.norm_sqr()
        })
        .collect();
    (pairwise_sum(&terms) / grid.box_volume()).sqrt()
}

/// Initial position and velocity, with their Sobolev norms at the orders the
/// well-posedness theory asks for (`H^{1+kappa}` and `H^kappa`).
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Field,
    pub u1: Field,
    pub sobolev_check: (f64, f64),
}

impl InitialData {
    pub fn new(u0: Field, u1: Field, kappa: f64) -> Result<Self> {
        if u0.grid() != u1.grid() {
            return Err(Error::GridMismatch);
        }
        let sobolev_check = (sobolev_norm(&u0, 1.0 + kappa), sobolev_norm(&u1, kappa));
        if !sobolev_check.0.is_finite() || !sobolev_check.1.is_finite() {
            return Err(Error::ParamOutOfRange("initial data Sobolev norms are not finite".into()));
        }
        Ok(Self { u0, u1, sobolev_check })
    }

    pub fn grid(&self) -> &BoxGrid {
        self.u0.grid()
    }
}

/// `(d/dt G)_t u0 + G_t u1`.
pub fn initial_wave(data: &InitialData, t: f64) -> Result<Field> {
    apply_dtg(t, &data.u0)?.try_add(&apply_g(t, &data.u1)?)
}

/// The free wave on every point of a partition.
pub fn initial_wave_path(data: &InitialData, partition: DyadicPartition) -> Result<ProcessPath> {
    ProcessPath::from_fn(partition, |t| initial_wave(data, t))
}

/// Exponents returned by [`admissible_params`], with the slack parameters used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTuple {
    pub kappa: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    pub p: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl ParamTuple {
    pub fn exponents(&self) -> Exponents {
        Exponents { kappa: self.kappa, alpha: self.alpha, gamma: self.gamma, theta: self.theta, p: self.p }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Admissibility {
    Feasible(ParamTuple),
    Infeasible { violated: String },
}

impl Admissibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Admissibility::Feasible(_))
    }

    pub fn tuple(&self) -> Option<&ParamTuple> {
        match self {
            Admissibility::Feasible(t) => Some(t),
            Admissibility::Infeasible { .. } => None,
        }
    }

    pub fn into_result(self) -> Result<ParamTuple> {
        match self {
            Admissibility::Feasible(t) => Ok(t),
            Admissibility::Infeasible { violated } => Err(Error::Infeasible(violated)),
        }
    }
}

/// Largest power of two tried as the integrability exponent `p`.
pub const MAX_P_EXPONENT: i32 = 30;
/// Smallest slack tried, `2^-60`.
pub const MAX_DELTA_EXPONENT: i32 = 60;

/// Constructs `(kappa, alpha, gamma, theta, p)` for noise of time roughness
/// `a0` and spatial index `alpha_d`, when `0 < alpha_d < (rho_d - a0)/2`.
///
/// With `eps = ((rho_d - a0)/2 - alpha_d)/4` it fixes `theta = 1 - a0/2 - eps`
/// and `alpha = alpha_d + eps`, then takes the smallest `p = 2^i >= 8` and the
/// largest `delta = 2^-k` for which `kappa = alpha + d/p + delta` and
/// `gamma = 1 - theta + delta` satisfy every convergence condition.
pub fn admissible_params(dim: usize, a0: f64, alpha_d: f64) -> Admissibility {
    let infeasible = |violated: String| Admissibility::Infeasible { violated };
    if dim != 1 && dim != 2 {
        return infeasible(format!("dimension {dim} is not 1 or 2"));
    }
    if !(a0 > 0.0 && a0 < 2.0) {
        return infeasible(format!("a0 = {a0} must lie in (0, 2)"));
    }
    if !(alpha_d > 0.0) {
        return infeasible(format!("alpha_d = {alpha_d} must be positive"));
    }
    let r = rho(dim);
    let bound = 0.5 * (r - a0);
    if !(alpha_d < bound) {
        return infeasible(format!("alpha_d < (rho_d - a0)/2 fails: {alpha_d} >= {bound}"));
    }
    let epsilon = 0.25 * (bound - alpha_d);
    let theta = 1.0 - a0 / 2.0 - epsilon;
    let alpha = alpha_d + epsilon;
    let d = dim as f64;
    for i in 3..=MAX_P_EXPONENT {
        let p = 2f64.powi(i);
        for k in 1..=MAX_DELTA_EXPONENT {
            let delta = 2f64.powi(-k);
            let t = ParamTuple {
                kappa: alpha + d / p + delta,
                alpha,
                gamma: 1.0 - theta + delta,
                theta,
                p,
                delta,
                epsilon,
            };
            if t.exponents().violations(dim).is_empty() {
                return Admissibility::Feasible(t);
            }
        }
    }
    infeasible(format!(
        "no p <= 2^{MAX_P_EXPONENT} and delta >= 2^-{MAX_DELTA_EXPONENT} satisfy the convergence conditions"
    ))
}

/// Settings of one Picard solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub dim: usize,
    pub a0: f64,
    /// Spatial scaling exponent `a` of the noise (`alpha_d = a/2`).
    pub noise_exponent: f64,
    pub params: ParamTuple,
    pub grid: BoxGrid,
    /// Dyadic level of the time partition.
    pub level: u32,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub seed: u64,
    pub horizon: f64,
    /// Weight schedule `mu_t = a + b t` of the path norm.
    pub weight_a: f64,
    pub weight_b: f64,
}

impl SolveConfig {
    /// Derives the exponents from `admissible_params` with `alpha_d = a/2`.
    pub fn admissible(dim: usize, a0: f64, noise_exponent: f64, grid: BoxGrid, level: u32) -> Result<Self> {
        let params = admissible_params(dim, a0, noise_exponent / 2.0).into_result()?;
        Ok(Self {
            dim,
            a0,
            noise_exponent,
            params,
            grid,
            level,
            picard_tol: 1e-6,
            picard_max: 12,
            seed: 0,
            horizon: 1.0,
            weight_a: 1.0,
            weight_b: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.dim() != self.dim {
            return Err(Error::InvalidGrid(format!("grid has dimension {}, config {}", self.grid.dim(), self.dim)));
        }
        let v = self.params.exponents().violations(self.dim);
        if !v.is_empty() {
            return Err(Error::ParamConstraintViolated(v.join("; ")));
        }
        if !(self.params.p > self.dim as f64 + 1.0) {
            return Err(Error::ParamConstraintViolated(format!("p = {} must exceed d + 1", self.params.p)));
        }
        if !(self.picard_tol > 0.0) || self.picard_max == 0 {
            return Err(Error::ParamOutOfRange("picard_tol must be positive and picard_max nonzero".into()));
        }
        DyadicPartition::new(self.horizon, self.level)?;
        Ok(())
    }

    pub fn partition(&self) -> Result<DyadicPartition> {
        DyadicPartition::new(self.horizon, self.level)
    }

    pub fn path_spec(&self) -> Result<PathSpaceSpec> {
        PathSpaceSpec::new(self.params.gamma, self.params.kappa, self.weight_a, self.weight_b, self.horizon)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub path: ProcessPath,
    pub iterates_delta: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config: SolveConfig,
    times: Vec<f64>,
    iterates_delta: Vec<f64>,
    residual: f64,
    converged: bool,
}

impl Solution {
    /// Writes `u_NNNNN.bwf` snapshots and a `solution.json` manifest.
    pub fn save(&self, dir: impl AsRef<Path>, cfg: &SolveConfig) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for (i, f) in self.path.values().iter().enumerate() {
            f.write_bwf(dir.join(format!("u_{i:05}.bwf")))?;
        }
        let manifest = Manifest {
            config: cfg.clone(),
            times: self.path.times(),
            iterates_delta: self.iterates_delta.clone(),
            residual: self.residual,
            converged: self.converged,
        };
        fs::write(dir.join("solution.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

/// `u -> u^(0) + J^(n)(u)` on the level-`n` partition.
fn picard_map(u: &ProcessPath, free: &ProcessPath, w: &NoisePath, level: u32) -> Result<ProcessPath> {
    let times = u.times();
    let j = riemann_sums_at(u, w, level, &times)?;
    let values = free.values().iter().zip(&j).map(|(a, b)| a.try_add(b)).collect::<Result<_>>()?;
    ProcessPath::new(*u.partition(), values)
}

fn check_noise(w: &NoisePath, cfg: &SolveConfig) -> Result<()> {
    let wp = DyadicPartition::from_times(w.times())?;
    if wp.level() < cfg.level || (wp.horizon() - cfg.horizon).abs() > 1e-12 * cfg.horizon {
        return Err(Error::PartitionMismatch(format!(
            "noise partition (T = {}, level {}) does not resolve the solve partition (T = {}, level {})",
            wp.horizon(),
            wp.level(),
            cfg.horizon,
            cfg.level
        )));
    }
    if *w.grid() != cfg.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Picard iteration started from the free wave.
pub fn picard_solve(data: &InitialData, w: &NoisePath, cfg: &SolveConfig, m: &Mollifier) -> Result<Solution> {
    let free = initial_wave_path(data, cfg.partition()?)?;
    picard_iterate(data, w, cfg, m, free.clone(), &free)
}

/// Picard iteration from an arbitrary first guess on the solve partition.
pub fn picard_solve_from(
    data: &InitialData,
    w: &NoisePath,
    cfg: &SolveConfig,
    m: &Mollifier,
    guess: ProcessPath,
) -> Result<Solution> {
    let free = initial_wave_path(data, cfg.partition()?)?;
    picard_iterate(data, w, cfg, m, guess, &free)
}

fn picard_iterate(
    data: &InitialData,
    w: &NoisePath,
    cfg: &SolveConfig,
    m: &Mollifier,
    guess: ProcessPath,
    free: &ProcessPath,
) -> Result<Solution> {
    cfg.validate()?;
    check_noise(w, cfg)?;
    if data.grid() != &cfg.grid {
        return Err(Error::GridMismatch);
    }
    if guess.partition() != free.partition() {
        return Err(Error::PartitionMismatch("initial guess is not on the solve partition".into()));
    }
    let spec = cfg.path_spec()?;
    let mut u = guess;
    let mut deltas: Vec<f64> = Vec::new();
    let mut rising = 0;
    let mut converged = false;
    for _ in 0..cfg.picard_max {
        let next = picard_map(&u, free, w, cfg.level)?;
        let delta = next.try_sub(&u)?.norm(&spec, m)?;
        if let Some(&prev) = deltas.last() {
            rising = if delta > prev { rising + 1 } else { 0 };
        }
        deltas.push(delta);
        u = next;
        if rising >= 3 {
            return Err(Error::PicardDiverged { deltas });
        }
        if delta < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    let residual = residual(&u, data, w, cfg, m)?;
    Ok(Solution { path: u, iterates_delta: deltas, residual, converged })
}

/// `||u - (u^(0) + J^(n)(u))||_E` on the solve partition.
pub fn residual(u: &ProcessPath, data: &InitialData, w: &NoisePath, cfg: &SolveConfig, m: &Mollifier) -> Result<f64> {
    check_noise(w, cfg)?;
    let free = initial_wave_path(data, *u.partition())?;
    let image = picard_map(u, &free, w, cfg.level)?;
    u.try_sub(&image)?.norm(&cfg.path_spec()?, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_tuple() {
        let t = *admissible_params(1, 0.3, 0.25).tuple().unwrap();
        assert!((t.epsilon - 0.025).abs() < 1e-15);
        assert!((t.theta - 0.825).abs() < 1e-15);
        assert!((t.alpha - 0.275).abs() < 1e-15);
        assert_eq!(t.p, 16.0);
        assert_eq!(t.delta, 1.0 / 64.0);
    }

    #[test]
    fn scaling_thresholds() {
        assert!(!admissible_params(2, 0.3, 0.2).is_feasible());
        assert!(!admissible_params(1, 0.3, 0.35).is_feasible());
        assert!(admissible_params(2, 0.1, 0.1).is_feasible());
    }

    #[test]
    fn sobolev_norm_of_constant_is_l2_norm() {
        let g = BoxGrid::new(1, 64, 2.0).unwrap();
        let f = Field::constant(g, 3.0);
        assert!((sobolev_norm(&f, 1.5) - 3.0 * 2.0).abs() < 1e-12);
    }
}
