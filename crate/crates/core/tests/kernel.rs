//! Kernel quantities checked against independent routes.

use std::f64::consts::PI;

use youngwave::quadrature::piecewise_graded;
use youngwave::wave_kernel::{kcal_pointwise, kcal_quantity, kernel_l1_diff, translation_l1_diff};

#[test]
fn radial_integral_of_pointwise_k_matches_the_norm_in_two_dimensions() {
    for &(t, j) in &[(0.5, 0u32), (0.2, 2), (1.0, 3)] {
        let outer = t + 2.0 * 2f64.powi(-(j as i32));
        let mut breaks = vec![0.0, outer];
        for b in [t, (t - 2.0 * 2f64.powi(-(j as i32))).abs()] {
            if b > 0.0 && b < outer {
                breaks.push(b);
            }
        }
        let integral = piecewise_graded(&breaks, 32, 24, |r| 2.0 * PI * r * kcal_pointwise(2, t, j, r).unwrap());
        let norm = kcal_quantity(2, t, j).unwrap();
        assert!((integral - norm).abs() <= 1e-5 * norm, "t={t} j={j}: {integral} vs {norm}");
    }
}

#[test]
fn one_dimensional_translation_difference_is_explicit() {
    // G_t = 1_{|x| < t} / 2, and a shift by rho changes it on a set of measure 2 min(rho, 2t).
    for &(t, r) in &[(0.5, 0.1), (0.5, 2.0), (0.25, 0.3)] {
        let expected = f64::min(r, 2.0 * t);
        assert!((translation_l1_diff(1, t, r) - expected).abs() < 1e-12, "t={t} rho={r}");
    }
}

#[test]
fn kernel_difference_grows_with_the_gap() {
    for dim in [1, 2] {
        let mut last = 0.0;
        for k in 1..8 {
            let v = kernel_l1_diff(dim, 0.1, 0.1 + 0.1 * k as f64).unwrap();
            assert!(v > last);
            last = v;
        }
        assert_eq!(kernel_l1_diff(dim, 0.3, 0.3).unwrap(), 0.0);
    }
}
