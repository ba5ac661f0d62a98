//! Run configuration: one TOML file, overridable by `--section.key=value` flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use youngwave::grid::BoxGrid;
use youngwave::noise::SpectralMeasure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSection,
    pub noise: NoiseSection,
    pub kernel: KernelSection,
    pub young: YoungSection,
    pub solve: SolveSection,
    pub params: ParamsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            grid: GridSection::default(),
            noise: NoiseSection::default(),
            kernel: KernelSection::default(),
            young: YoungSection::default(),
            solve: SolveSection::default(),
            params: ParamsSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dim: 1, n: 2048, half_width: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub a0: f64,
    pub measure: SpectralMeasure,
    /// Truncation `|beta| <= 2^level`.
    pub level: u32,
    /// Dyadic level of the sampled time grid.
    pub time_level: u32,
    /// Monte-Carlo paths for the covariance check.
    pub mc_paths: usize,
    /// Seeds per level in the level-difference decay fit.
    pub decay_seeds: usize,
    pub decay_levels: [u32; 2],
    /// Write the sampled path as field snapshots.
    pub save_path: bool,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            a0: 0.05,
            measure: SpectralMeasure::RadialRiesz { exponent: 0.05 },
            level: 4,
            time_level: 4,
            mc_paths: 2000,
            decay_seeds: 20,
            decay_levels: [3, 7],
            save_path: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// Random `(s, t)` pairs for the L1 checks.
    pub pairs: usize,
    /// Levels `0..=j_max` of the K-quantity lattice.
    pub j_max: u32,
    pub times: Vec<f64>,
    /// Members of the rough family in the slope table (0 skips it).
    pub strichartz_members: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self { pairs: 100, j_max: 8, times: vec![0.1, 0.5, 1.0], strichartz_members: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YoungSection {
    pub time_level: u32,
    pub n_min: u32,
    pub n_max: u32,
    pub eval_level: u32,
    pub q: f64,
    /// Height and radius of the bump used as initial position.
    pub amplitude: f64,
    pub radius: f64,
}

impl Default for YoungSection {
    fn default() -> Self {
        Self { time_level: 10, n_min: 4, n_max: 10, eval_level: 6, q: 8.0, amplitude: 1.0, radius: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub level: u32,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub horizon: f64,
    pub amplitude: f64,
    pub radius: f64,
    /// Height of the bump used as initial velocity.
    pub velocity: f64,
    /// Also solve with zero noise and compare with d'Alembert (d = 1).
    pub zero_noise_check: bool,
    pub save_solution: bool,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            level: 6,
            picard_tol: 1e-6,
            picard_max: 12,
            horizon: 1.0,
            amplitude: 10.0,
            radius: 3.0,
            velocity: 0.0,
            zero_noise_check: true,
            save_solution: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub dim: usize,
    pub a0: f64,
    pub a: f64,
    pub sweep: bool,
    pub cells: usize,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { dim: 1, a0: 0.3, a: 0.5, sweep: false, cells: 100 }
    }
}

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `section.key=value`
    /// overrides, each value parsed as a TOML literal when possible.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        // Defaults first, so partial sections and overrides fill in around them.
        let mut tree = toml::Table::try_from(RunConfig::default()).context("serializing defaults")?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let file = text.parse::<toml::Table>().with_context(|| format!("parsing {}", p.display()))?;
            merge(&mut tree, file);
        }
        for (key, raw) in overrides {
            set_path(&mut tree, key, parse_value(raw))?;
        }
        let cfg: RunConfig = toml::Value::Table(tree).try_into().context("invalid configuration")?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<BoxGrid> {
        BoxGrid::new(self.grid.dim, self.grid.n, self.grid.half_width).map_err(|e| anyhow!("grid: {e}"))
    }

    /// Spatial scaling exponent of the noise, required by the solve-side commands.
    pub fn noise_exponent(&self) -> Result<f64> {
        self.noise
            .measure
            .scaling_exponent()
            .ok_or_else(|| anyhow!("noise.measure: exponent choice needs a Riesz-type measure"))
    }
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(tree: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("malformed override key '{key}'");
    }
    let mut node = tree;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override '{key}': '{part}' is not a section"))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = RunConfig::load(
            None,
            &[
                ("noise.a0".into(), "0.4".into()),
                ("noise.measure.exponent".into(), "0.25".into()),
                ("seed".into(), "11".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.noise.a0, 0.4);
        assert_eq!(cfg.noise.measure, SpectralMeasure::RadialRiesz { exponent: 0.25 });
        assert_eq!(cfg.seed, 11);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::load(None, &[("grid.size".into(), "3".into())]).is_err());
    }
}
