//! Feasibility sweeps over the exponent plane.

use youngwave::admissibility::{sweep, Lattice};
use youngwave::solver::admissible_params;
use youngwave::wave_kernel::rho;

#[test]
fn sweep_boundary_follows_the_critical_line() {
    for dim in [1, 2] {
        let g = sweep(dim, Lattice::full(dim, 30, 30)).unwrap();
        assert!(g.boundary_error_cells() <= 1.0);
        assert!(g.is_monotone());
        let (checked, bad) = g.spectral_cross_check().unwrap();
        assert!(checked > 0);
        assert!(bad.is_empty(), "{bad:?}");
    }
}

#[test]
fn cell_verdicts_do_not_depend_on_the_sweep() {
    let g = sweep(1, Lattice::full(1, 12, 12)).unwrap();
    for c in g.cells.iter().rev() {
        assert_eq!(c.verdict, admissible_params(1, c.a0, c.a / 2.0));
    }
}

#[test]
fn feasible_cells_lie_below_the_line() {
    let g = sweep(2, Lattice::full(2, 20, 20)).unwrap();
    for c in &g.cells {
        if c.verdict.is_feasible() {
            assert!(c.a0 + c.a < rho(2));
        }
    }
}

#[test]
fn empty_lattice_is_rejected() {
    assert!(sweep(1, Lattice::full(1, 0, 5)).is_err());
}
