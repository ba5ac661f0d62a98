//! Feasibility landscape of the exponent construction over `(a0, a)`, where
//! `a0` is the time roughness of the noise and `a` its spatial scaling
//! exponent (`alpha_d = a/2`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{integrability, SpectralMeasure};
use crate::solver::{admissible_params, Admissibility};
use crate::wave_kernel::rho;

/// Slack `eta` in the spectral integrability test
/// `\int (1 + |xi|)^{-(rho_d - a0 - eta)} mu(d xi) < infinity`.
pub const SPECTRAL_SLACK: f64 = 1e-3;

/// Cell-centred lattice over `(0, a0_max) x (0, a_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub a0_cells: usize,
    pub a_cells: usize,
    pub a0_max: f64,
    pub a_max: f64,
}

impl Lattice {
    /// The full parameter range `a0 in (0, 2)`, `a in (0, 2d)`.
    pub fn full(dim: usize, a0_cells: usize, a_cells: usize) -> Self {
        Self { a0_cells, a_cells, a0_max: 2.0, a_max: 2.0 * dim as f64 }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.a0_cells == 0 || self.a_cells == 0 {
            return Err(Error::ParamOutOfRange("lattice needs at least one cell per axis".into()));
        }
        if !(self.a0_max > 0.0 && self.a0_max <= 2.0) || !(self.a_max > 0.0 && self.a_max <= 2.0 * dim as f64) {
            return Err(Error::ParamOutOfRange(format!(
                "lattice must lie within a0 in (0, 2), a in (0, {})",
                2 * dim
            )));
        }
        Ok(())
    }

    pub fn a0_step(&self) -> f64 {
        self.a0_max / self.a0_cells as f64
    }

    pub fn a_step(&self) -> f64 {
        self.a_max / self.a_cells as f64
    }

    pub fn a0(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.a0_step()
    }

    pub fn a(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.a_step()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub a0: f64,
    pub a: f64,
    pub verdict: Admissibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityGrid {
    pub dim: usize,
    pub lattice: Lattice,
    /// Row-major in `a0`, then `a`.
    pub cells: Vec<Cell>,
    /// For each `a0` row, the estimated `a` where the verdict flips.
    pub boundary: Vec<f64>,
}

/// Evaluates `admissible_params(d, a0, a/2)` on every lattice cell.
pub fn sweep(dim: usize, lattice: Lattice) -> Result<FeasibilityGrid> {
    lattice.validate(dim)?;
    let cells: Vec<Cell> = (0..lattice.a0_cells * lattice.a_cells)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / lattice.a_cells, idx % lattice.a_cells);
            let (a0, a) = (lattice.a0(i), lattice.a(j));
            Cell { a0, a, verdict: admissible_params(dim, a0, a / 2.0) }
        })
        .collect();
    let boundary = (0..lattice.a0_cells)
        .map(|i| {
            let row = &cells[i * lattice.a_cells..(i + 1) * lattice.a_cells];
            let last_feasible = row.iter().rposition(|c| c.verdict.is_feasible());
            match last_feasible {
                None => 0.0,
                Some(j) if j + 1 == row.len() => lattice.a_max,
                Some(j) => 0.5 * (row[j].a + row[j + 1].a),
            }
        })
        .collect();
    Ok(FeasibilityGrid { dim, lattice, cells, boundary })
}

impl FeasibilityGrid {
    /// Largest distance, in `a`-cells, between the extracted boundary and the
    /// line `a0 + a = rho_d` (clipped to the lattice).
    pub fn boundary_error_cells(&self) -> f64 {
        let r = rho(self.dim);
        (0..self.lattice.a0_cells)
            .map(|i| {
                let expected = (r - self.lattice.a0(i)).clamp(0.0, self.lattice.a_max);
                (self.boundary[i] - expected).abs() / self.lattice.a_step()
            })
            .fold(0.0, f64::max)
    }

    /// Feasible cells form a down-set in both coordinates.
    pub fn is_monotone(&self) -> bool {
        let l = &self.lattice;
        let feasible = |i: usize, j: usize| self.cells[i * l.a_cells + j].verdict.is_feasible();
        (0..l.a0_cells).all(|i| {
            (0..l.a_cells).all(|j| {
                !feasible(i, j) || ((i == 0 || feasible(i - 1, j)) && (j == 0 || feasible(i, j - 1)))
            })
        })
    }

    /// Compares every cell's verdict with the spectral integrability test for
    /// the radial measure `|xi|^{a-d} d xi`; cells within one lattice cell of
    /// `a0 + a = rho_d` are skipped. Returns `(checked, disagreements)`.
    pub fn spectral_cross_check(&self) -> Result<(usize, Vec<(f64, f64)>)> {
        let r = rho(self.dim);
        let margin = self.lattice.a0_step() + self.lattice.a_step();
        let results: Vec<Option<(f64, f64, bool)>> = self
            .cells
            .par_iter()
            .map(|c| {
                if (c.a0 + c.a - r).abs() <= margin {
                    return Ok(None);
                }
                let measure = SpectralMeasure::RadialRiesz { exponent: c.a };
                let report = integrability(&measure, self.dim, r - c.a0 - SPECTRAL_SLACK)?;
                Ok(Some((c.a0, c.a, report.finite == c.verdict.is_feasible())))
            })
            .collect::<Result<_>>()?;
        let checked = results.iter().flatten().count();
        let bad = results.iter().flatten().filter(|x| !x.2).map(|x| (x.0, x.1)).collect();
        Ok((checked, bad))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("a0,a,verdict,kappa,alpha,gamma,theta,p\n");
        for c in &self.cells {
            match &c.verdict {
                Admissibility::Feasible(t) => s.push_str(&format!(
                    "{:.6},{:.6},feasible,{:.12},{:.12},{:.12},{:.12},{}\n",
                    c.a0, c.a, t.kappa, t.alpha, t.gamma, t.theta, t.p
                )),
                Admissibility::Infeasible { .. } => {
                    s.push_str(&format!("{:.6},{:.6},infeasible,,,,,\n", c.a0, c.a))
                }
            }
        }
        s
    }

    /// Gnuplot script drawing the feasible cells from `csv_name` and the line
    /// `a0 + a = rho_d`.
    pub fn gnuplot_script(&self, csv_name: &str, png_name: &str) -> String {
        let r = rho(self.dim);
        format!(
            "set terminal pngcairo size 800,700\n\
             set output '{png_name}'\n\
             set datafile separator ','\n\
             set xlabel 'a0'\n\
             set ylabel 'a'\n\
             set title 'Feasible exponents, d = {d}'\n\
             set xrange [0:{x}]\n\
             set yrange [0:{y}]\n\
             plot '{csv_name}' using 1:(strcol(3) eq 'feasible' ? $2 : 1/0) with points pt 5 ps 0.4 lc rgb '#2c7bb6' title 'feasible', \\\n\
             \x20    {r} - x with lines lw 2 lc rgb '#d7191c' title 'a0 + a = {r}'\n",
            d = self.dim,
            x = self.lattice.a0_max,
            y = self.lattice.a_max,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_boundary() {
        let g = sweep(1, Lattice::full(1, 20, 20)).unwrap();
        assert!(g.boundary_error_cells() <= 1.0);
        assert!(g.is_monotone());
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let g = sweep(2, Lattice::full(2, 5, 4)).unwrap();
        assert_eq!(g.to_csv().lines().count(), 21);
    }
}
