//! The five commands. Each validates its part of the configuration, runs, and
//! returns tables plus thresholded checks.

use std::path::Path;

use anyhow::anyhow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use youngwave::admissibility::{sweep, Lattice};
use youngwave::besov::{combine_levels, BesovSpec, Mollifier, Summability, Weight, DEFAULT_MOMENT_ORDER};
use youngwave::grid::{forward_transform, inverse_transform, BoxGrid, Field};
use youngwave::noise::{covariance_with_masses, holder_besov_norm, mode_weights, NoiseConfig, NoisePath};
use youngwave::quadrature::composite;
use youngwave::solver::{admissible_params, initial_wave, picard_solve, Admissibility, InitialData, SolveConfig};
use youngwave::stats::{dyadic_rate_fit, jackknife_stderr, loglog_fit, mean, median};
use youngwave::wave_kernel::{
    increment_block_norms, kcal_pointwise, kcal_quantity, kernel_l1_diff, kernel_l1_diff_with, rho, DEFAULT_PANELS,
};
use youngwave::young::{cauchy_report, DyadicPartition, ProcessPath, YoungOptions};

use crate::config::RunConfig;
use crate::report::{Check, Report, Table};

/// Why a command stopped: bad configuration (exit 2) or a runtime error (exit 1).
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type Outcome = Result<Report, Failure>;

fn is_config_error(e: &youngwave::Error) -> bool {
    use youngwave::Error::*;
    matches!(
        e,
        InvalidGrid(_)
            | ParamOutOfRange(_)
            | ParamConstraintViolated(_)
            | NonIntegrableAtOrigin(_)
            | Infeasible(_)
            | WrapAroundRisk { .. }
            | BadTimeOrder { .. }
            | LevelOutOfRange { .. }
    )
}

/// Routes library errors to the right exit class.
trait Classify<T> {
    fn config(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T> Classify<T> for youngwave::Result<T> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| if is_config_error(&e) { Failure::Config(e.into()) } else { Failure::Runtime(e.into()) })
    }
}

impl<T> Classify<T> for anyhow::Result<T> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(Failure::Config)
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(Failure::Runtime)
    }
}

fn invalid(msg: String) -> Failure {
    Failure::Config(anyhow!(msg))
}

fn bump(grid: BoxGrid, radius: f64, height: f64) -> Field {
    Field::from_fn(grid, |p| bump_value(p[0] * p[0] + p[1] * p[1], radius, height))
}

fn bump_value(r2: f64, radius: f64, height: f64) -> f64 {
    let s = r2 / (radius * radius);
    if s < 1.0 {
        height * (1.0 - 1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

fn random_pairs(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Filtered white noise with spectral amplitude `|xi|^{-(d/2 + alpha)}`,
/// localized by a bump of radius `L/2`.
fn rough_member(grid: BoxGrid, seed: u64, alpha: f64) -> youngwave::Result<Field> {
    use rand_distr::StandardNormal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white = Field::new(grid, (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect())?;
    let power = -(grid.dim() as f64 / 2.0 + alpha);
    let shaped = forward_transform(&white).apply_multiplier(|i| {
        let xi = grid.frequency_norm(i);
        if xi == 0.0 || grid.is_nyquist(i) {
            0.0
        } else {
            xi.powf(power)
        }
    });
    inverse_transform(&shaped)?.pointwise(&bump(grid, 0.5 * grid.half_width(), 1.0))
}

pub fn kernel_check(cfg: &RunConfig) -> Outcome {
    let k = &cfg.kernel;
    if k.pairs == 0 || k.times.is_empty() {
        return Err(invalid("kernel: empty sweep (pairs and times must be non-empty)".into()));
    }
    if k.times.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(invalid("kernel.times: every time must lie in (0, 1]".into()));
    }
    let mut report = Report::default();

    let mut t1 = Table::new("kernel_l1_d1", &["s", "t", "l1", "exact", "abs_error"]);
    let mut worst = 0.0f64;
    for (s, t) in random_pairs(cfg.seed, k.pairs) {
        let v = kernel_l1_diff(1, s, t).runtime()?;
        worst = worst.max((v - (t - s)).abs());
        t1.push(vec![json!(s), json!(t), json!(v), json!(t - s), json!((v - (t - s)).abs())]);
    }
    report.checks.push(Check::new("l1_d1_max_error", worst, "<= 1e-12", worst <= 1e-12));
    report.tables.push(t1);

    let mut t2 = Table::new("kernel_l1_d2", &["s", "t", "l1", "ratio", "ratio_refined"]);
    let (mut coarse, mut fine) = (0.0f64, 0.0f64);
    for (s, t) in random_pairs(cfg.seed.wrapping_add(1), k.pairs.min(50)) {
        let v = kernel_l1_diff_with(2, s, t, DEFAULT_PANELS).runtime()?;
        let w = kernel_l1_diff_with(2, s, t, 2 * DEFAULT_PANELS).runtime()?;
        let g = (t - s).sqrt();
        coarse = coarse.max(v / g);
        fine = fine.max(w / g);
        t2.push(vec![json!(s), json!(t), json!(v), json!(v / g), json!(w / g)]);
    }
    let change = (fine - coarse).abs() / coarse;
    report.checks.push(Check::new("l1_d2_refinement_change", change, "< 0.05", coarse.is_finite() && change < 0.05));
    report.tables.push(t2);

    let mut t3 = Table::new("kcal", &["d", "t", "j", "value", "support_leak"]);
    for dim in [1usize, 2] {
        let coarse_max = k.times.iter().map(|&t| kcal_quantity(dim, t, 0)).collect::<youngwave::Result<Vec<_>>>().runtime()?;
        let coarse_max = coarse_max.into_iter().fold(0.0, f64::max);
        let mut overall = 0.0f64;
        let mut leak = 0.0f64;
        for j in 0..=k.j_max {
            for &t in &k.times {
                let v = kcal_quantity(dim, t, j).runtime()?;
                let mut l = 0.0f64;
                for r in [t + 2.0 + 1e-9, t + 2.5, t + 4.0] {
                    l = l.max(kcal_pointwise(dim, t, j, r).runtime()?.abs());
                }
                overall = overall.max(v);
                leak = leak.max(l);
                t3.push(vec![json!(dim), json!(t), json!(j), json!(v), json!(l)]);
            }
        }
        report.checks.push(Check::new(
            &format!("kcal_d{dim}_max_over_coarse"),
            overall / coarse_max,
            "<= 1.5",
            overall <= 1.5 * coarse_max,
        ));
        report.checks.push(Check::new(&format!("kcal_d{dim}_support_leak"), leak, "<= 1e-10", leak <= 1e-10));
    }
    report.tables.push(t3);

    if k.strichartz_members > 0 {
        let grid = cfg.grid().config()?;
        let dim = grid.dim();
        let m = Mollifier::new(DEFAULT_MOMENT_ORDER, grid).config()?;
        let alpha = -0.5;
        let s = 0.25;
        let gaps: Vec<f64> = (3..=8).map(|e| 2f64.powi(-e)).collect();
        let kappas: &[f64] = if dim == 1 { &[0.0, 0.5, 1.0] } else { &[0.0, 0.25, 0.5] };
        let spec = BesovSpec::new(alpha, 2.0, Summability::Sup, Weight::Exponential(1.0)).config()?;
        let mut t4 = Table::new("strichartz", &["d", "kappa", "member", "slope", "target"]);
        let mut all = true;
        let mut margin = f64::INFINITY;
        for member in 0..k.strichartz_members {
            let f = rough_member(grid, cfg.seed.wrapping_add(100 + member as u64), alpha).runtime()?;
            let blocks = gaps
                .iter()
                .map(|g| increment_block_norms(&f, s, s + g, 2.0, &spec, &m))
                .collect::<youngwave::Result<Vec<_>>>()
                .runtime()?;
            for &kappa in kappas {
                let norms: Vec<f64> = blocks.iter().map(|b| combine_levels(b, alpha + kappa, Summability::Sup)).collect();
                let slope = loglog_fit(&gaps, &norms).map(|f| f.slope).unwrap_or(f64::NAN);
                let target = rho(dim) - kappa - 0.15;
                all &= slope >= target;
                margin = margin.min(slope - target);
                t4.push(vec![json!(dim), json!(kappa), json!(member), json!(slope), json!(target)]);
            }
        }
        report.checks.push(Check::new("strichartz_min_margin", margin, ">= 0", all));
        report.tables.push(t4);
    }
    Ok(report)
}

fn noise_config(cfg: &RunConfig, grid: BoxGrid, time_level: u32, horizon: f64) -> Result<NoiseConfig, Failure> {
    let times = DyadicPartition::new(horizon, time_level).config()?.points();
    let nc = NoiseConfig {
        a0: cfg.noise.a0,
        measure: cfg.noise.measure.clone(),
        level: cfg.noise.level,
        seed: cfg.seed,
        grid,
        times,
    };
    nc.validate().config()?;
    Ok(nc)
}

pub fn noise(cfg: &RunConfig, out: &Path) -> Outcome {
    let grid = cfg.grid().config()?;
    let nc = noise_config(cfg, grid, cfg.noise.time_level, 1.0)?;
    let [lo, hi] = cfg.noise.decay_levels;
    if cfg.noise.decay_seeds > 0 && (lo >= hi || 2f64.powi(hi as i32 + 1) > grid.nyquist()) {
        return Err(invalid(format!(
            "noise.decay_levels: need lo < hi and 2^(hi+1) <= Nyquist frequency {:.1}",
            grid.nyquist()
        )));
    }
    let mut report = Report::default();
    let path = NoisePath::sample(&nc).runtime()?;
    if cfg.noise.save_path {
        path.save(out.join("noise_path")).runtime()?;
    }
    let mut slices = Table::new("noise_slices", &["index", "t", "max_abs"]);
    for (i, (t, s)) in path.times().iter().zip(path.slices()).enumerate() {
        slices.push(vec![json!(i), json!(t), json!(s.max_abs())]);
    }
    let first = path.slices()[0].max_abs();
    report.checks.push(Check::new("slice0_max_abs", first, "== 0", first == 0.0));
    report.tables.push(slices);

    if cfg.noise.mc_paths > 0 {
        let masses = mode_weights(&nc.measure, &grid, nc.level).config()?;
        let last = nc.times.len() - 1;
        let mid = last / 2;
        let c = grid.flat_index([grid.n() / 2, if grid.dim() == 2 { grid.n() / 2 } else { 0 }]);
        let shift = |k: usize| grid.flat_index([grid.n() / 2 + k, if grid.dim() == 2 { grid.n() / 2 } else { 0 }]);
        let probes = [(c, c, last, last), (c, c, mid, mid), (c, shift(1), last, last), (c, shift(5), mid, last), (shift(3), c, 1, last), (c, shift(17), last, mid)];
        let samples: Vec<Vec<f64>> = (0..cfg.noise.mc_paths as u64)
            .into_par_iter()
            .map(|k| {
                let p = NoisePath::sample(&nc.with_seed(cfg.seed.wrapping_mul(1_000_003).wrapping_add(k + 1)))?;
                Ok(probes.iter().map(|&(x, y, si, ti)| p.slices()[ti].samples()[x] * p.slices()[si].samples()[y]).collect())
            })
            .collect::<youngwave::Result<_>>()
            .runtime()?;
        let mut table = Table::new("noise_covariance", &["x", "y", "s", "t", "oracle", "mc_mean", "stderr", "z"]);
        let mut worst = 0.0f64;
        for (i, &(x, y, si, ti)) in probes.iter().enumerate() {
            let col: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            let oracle = covariance_with_masses(&grid, &masses, nc.a0, x, y, nc.times[si], nc.times[ti]);
            let se = jackknife_stderr(&col, 100.min(col.len()), mean);
            let z = (mean(&col) - oracle).abs() / se;
            worst = worst.max(z);
            let px = grid.point(x);
            let py = grid.point(y);
            table.push(vec![json!(px[0]), json!(py[0]), json!(nc.times[si]), json!(nc.times[ti]), json!(oracle), json!(mean(&col)), json!(se), json!(z)]);
        }
        report.checks.push(Check::new("covariance_max_z", worst, "<= 3", worst <= 3.0));
        report.tables.push(table);
    }

    if cfg.noise.decay_seeds > 0 {
        let a = cfg.noise_exponent().config()?;
        match admissible_params(grid.dim(), nc.a0, a / 2.0) {
            Admissibility::Feasible(t) => {
                let m = Mollifier::new(DEFAULT_MOMENT_ORDER, grid).config()?;
                let mut table = Table::new("noise_level_decay", &["n", "median_norm"]);
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for n in lo..=hi {
                    let norms = (0..cfg.noise.decay_seeds as u64)
                        .into_par_iter()
                        .map(|s| {
                            let c = NoiseConfig { level: n + 1, seed: cfg.seed.wrapping_add(s), ..nc.clone() };
                            holder_besov_norm(&NoisePath::sample_band(&c, Some(n))?, t.theta, t.alpha, t.p, &m)
                        })
                        .collect::<youngwave::Result<Vec<_>>>()
                        .runtime()?;
                    let med = median(&norms);
                    table.push(vec![json!(n), json!(med)]);
                    xs.push(n as f64);
                    ys.push(med);
                }
                let (eps, c, r2) = dyadic_rate_fit(&xs, &ys).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                report.details.insert("decay_fit".into(), json!({"epsilon": eps, "C": c, "r_squared": r2, "theta": t.theta, "alpha": t.alpha, "p": t.p}));
                report.checks.push(Check::new("decay_epsilon", eps, "> 0", eps > 0.0));
                report.tables.push(table);
            }
            Admissibility::Infeasible { violated } => {
                report.details.insert("decay_fit".into(), json!({"skipped": violated}));
            }
        }
    }
    Ok(report)
}

fn solve_config(cfg: &RunConfig, grid: BoxGrid, level: u32) -> Result<SolveConfig, Failure> {
    let a = cfg.noise_exponent().config()?;
    let mut sc = SolveConfig::admissible(grid.dim(), cfg.noise.a0, a, grid, level).config()?;
    sc.picard_tol = cfg.solve.picard_tol;
    sc.picard_max = cfg.solve.picard_max;
    sc.seed = cfg.seed;
    sc.horizon = cfg.solve.horizon;
    sc.validate().config()?;
    Ok(sc)
}

pub fn young(cfg: &RunConfig) -> Outcome {
    let y = &cfg.young;
    if y.n_min >= y.n_max || y.n_max > y.time_level {
        return Err(invalid("young: need n_min < n_max <= time_level".into()));
    }
    let grid = cfg.grid().config()?;
    let sc = solve_config(cfg, grid, y.time_level)?;
    let nc = noise_config(cfg, grid, y.time_level, sc.horizon)?;
    let m = Mollifier::new(DEFAULT_MOMENT_ORDER, grid).config()?;
    let data = InitialData::new(bump(grid, y.radius, y.amplitude), Field::zeros(grid), sc.params.kappa).config()?;
    bump(grid, y.radius, 1.0).check_propagation(sc.horizon).config()?;
    let w = NoisePath::sample(&nc).runtime()?;
    let u = ProcessPath::from_fn(sc.partition().config()?, |t| initial_wave(&data, t)).runtime()?;
    let opts = YoungOptions { eval_level: y.eval_level, q: y.q, exponents: Some(sc.params.exponents()) };
    let spec = sc.path_spec().config()?;
    let r = cauchy_report(&u, &w, y.n_min..=y.n_max, &spec, &opts, &m).runtime()?;
    let mut table = Table::new("cauchy", &["n", "d_n", "local_rate"]);
    for row in &r.rows {
        table.push(vec![json!(row.n), json!(row.d_n), row.local_rate.map_or(Value::Null, |v| json!(v))]);
    }
    let mut report = Report::default();
    report.tables.push(table);
    report.details.insert("cauchy".into(), serde_json::from_str(&r.summary_json()).runtime_json()?);
    report.details.insert("r_squared".into(), json!(r.r_squared));
    report.details.insert("boundedness_ratio".into(), json!(r.boundedness_ratio));
    report.details.insert("warnings".into(), json!(r.warnings));
    report.details.insert("params".into(), serde_json::to_value(sc.params).runtime_json()?);
    let eps = r.epsilon_fit.unwrap_or(f64::NAN);
    report.checks.push(Check::new("epsilon_fit", eps, "> 0", eps > 0.0));
    let d = r.differences();
    let decreasing = d.windows(2).all(|p| p[1] < p[0]);
    report.checks.push(Check::new("d_n_decreasing", f64::from(u8::from(decreasing)), "== 1", decreasing));
    Ok(report)
}

trait JsonRuntime<T> {
    fn runtime_json(self) -> Result<T, Failure>;
}

impl<T> JsonRuntime<T> for serde_json::Result<T> {
    fn runtime_json(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

/// `u(x, t)` from d'Alembert's formula for bump data in one dimension.
fn dalembert(x: f64, t: f64, s: &crate::config::SolveSection) -> f64 {
    let pos = 0.5 * (bump_value((x + t) * (x + t), s.radius, s.amplitude) + bump_value((x - t) * (x - t), s.radius, s.amplitude));
    let lo = (x - t).max(-s.radius);
    let hi = (x + t).min(s.radius);
    let vel = composite(lo, hi, 8, 16, |y| bump_value(y * y, s.radius, s.velocity));
    pos + 0.5 * vel
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Outcome {
    let s = &cfg.solve;
    let grid = cfg.grid().config()?;
    let sc = solve_config(cfg, grid, s.level)?;
    let nc = noise_config(cfg, grid, s.level, s.horizon)?;
    let m = Mollifier::new(DEFAULT_MOMENT_ORDER, grid).config()?;
    let data = InitialData::new(bump(grid, s.radius, s.amplitude), bump(grid, s.radius, s.velocity), sc.params.kappa).config()?;
    bump(grid, s.radius, 1.0).check_propagation(sc.horizon).config()?;
    let w = NoisePath::sample(&nc).runtime()?;
    let sol = picard_solve(&data, &w, &sc, &m).runtime()?;
    if s.save_solution {
        sol.save(out.join("solution"), &sc).runtime()?;
    }
    let mut report = Report::default();
    let mut table = Table::new("picard", &["iteration", "delta", "ratio"]);
    for (i, d) in sol.iterates_delta.iter().enumerate() {
        let ratio = if i > 0 { json!(d / sol.iterates_delta[i - 1]) } else { Value::Null };
        table.push(vec![json!(i + 1), json!(d), ratio]);
    }
    report.tables.push(table);
    report.details.insert("residual".into(), json!(sol.residual));
    report.details.insert("converged".into(), json!(sol.converged));
    report.details.insert("sobolev_check".into(), json!([data.sobolev_check.0, data.sobolev_check.1]));
    report.details.insert("params".into(), serde_json::to_value(sc.params).runtime_json()?);
    report.checks.push(Check::new("converged", f64::from(u8::from(sol.converged)), "== 1", sol.converged));

    if s.zero_noise_check && grid.dim() == 1 {
        let part = sc.partition().config()?;
        let zero = NoisePath::from_slices(part.points(), vec![Field::zeros(grid); part.intervals() + 1]).runtime()?;
        let free = picard_solve(&data, &zero, &sc, &m).runtime()?;
        let mut t = Table::new("dalembert", &["t", "max_error"]);
        let mut worst = 0.0f64;
        for (time, u) in part.points().iter().zip(free.path.values()) {
            let err = u
                .samples()
                .par_iter()
                .enumerate()
                .map(|(i, v)| (v - dalembert(grid.coordinate(i), *time, s)).abs())
                .reduce(|| 0.0, f64::max);
            worst = worst.max(err);
            t.push(vec![json!(time), json!(err)]);
        }
        report.tables.push(t);
        report.checks.push(Check::new("dalembert_max_error", worst, "< 1e-4", worst < 1e-4));
    }
    Ok(report)
}

pub fn params(cfg: &RunConfig, out: &Path) -> Outcome {
    let p = &cfg.params;
    if p.dim != 1 && p.dim != 2 {
        return Err(invalid(format!("params.dim = {} must be 1 or 2", p.dim)));
    }
    let mut report = Report::default();
    if p.sweep {
        if p.cells == 0 {
            return Err(invalid("params.cells: empty sweep".into()));
        }
        let g = sweep(p.dim, Lattice::full(p.dim, p.cells, p.cells)).config()?;
        let mut table = Table::new("feasibility", &["a0", "a", "verdict", "kappa", "alpha", "gamma", "theta", "p"]);
        for c in &g.cells {
            let row = match &c.verdict {
                Admissibility::Feasible(t) => vec![json!(c.a0), json!(c.a), json!("feasible"), json!(t.kappa), json!(t.alpha), json!(t.gamma), json!(t.theta), json!(t.p)],
                Admissibility::Infeasible { .. } => vec![json!(c.a0), json!(c.a), json!("infeasible"), Value::Null, Value::Null, Value::Null, Value::Null, Value::Null],
            };
            table.push(row);
        }
        report.tables.push(table);
        std::fs::create_dir_all(out).map_err(|e| Failure::Runtime(e.into()))?;
        std::fs::write(out.join("feasibility.gp"), g.gnuplot_script("feasibility.csv", "feasibility.png")).map_err(|e| Failure::Runtime(e.into()))?;
        let e = g.boundary_error_cells();
        report.checks.push(Check::new("boundary_error_cells", e, "<= 1", e <= 1.0));
        report.checks.push(Check::new("monotone", f64::from(u8::from(g.is_monotone())), "== 1", g.is_monotone()));
        let (checked, bad) = g.spectral_cross_check().runtime()?;
        report.details.insert("spectral_cells_checked".into(), json!(checked));
        report.checks.push(Check::new("spectral_disagreements", bad.len() as f64, "== 0", bad.is_empty()));
    } else {
        let verdict = admissible_params(p.dim, p.a0, p.a / 2.0);
        report.details.insert("verdict".into(), serde_json::to_value(&verdict).runtime_json()?);
        let mut table = Table::new("params", &["d", "a0", "a", "verdict", "kappa", "alpha", "gamma", "theta", "p", "delta"]);
        let row = match &verdict {
            Admissibility::Feasible(t) => vec![json!(p.dim), json!(p.a0), json!(p.a), json!("feasible"), json!(t.kappa), json!(t.alpha), json!(t.gamma), json!(t.theta), json!(t.p), json!(t.delta)],
            Admissibility::Infeasible { violated } => {
                let mut r = vec![json!(p.dim), json!(p.a0), json!(p.a), json!(format!("infeasible: {violated}"))];
                r.extend(std::iter::repeat_n(Value::Null, 6));
                r
            }
        };
        table.push(row);
        report.tables.push(table);
    }
    Ok(report)
}
