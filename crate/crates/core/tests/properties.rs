//! Randomized invariants: norm axioms, transform symmetries, partition nesting.

mod common;

use std::sync::OnceLock;

use common::random_smooth_field;
use proptest::prelude::*;
use youngwave::besov::{besov_norm, BesovSpec, Mollifier, Summability, Weight, DEFAULT_MOMENT_ORDER};
use youngwave::grid::{forward_transform, inverse_transform, product, BoxGrid};
use youngwave::young::DyadicPartition;

fn grid() -> BoxGrid {
    BoxGrid::new(1, 256, 8.0).unwrap()
}

fn mollifier() -> &'static Mollifier {
    static M: OnceLock<Mollifier> = OnceLock::new();
    M.get_or_init(|| Mollifier::new(DEFAULT_MOMENT_ORDER, grid()).unwrap())
}

fn spec() -> BesovSpec {
    BesovSpec::new(-0.3, 2.0, Summability::Sup, Weight::Exponential(1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn besov_norm_is_absolutely_homogeneous(seed in 0u64..10_000, c in -50.0f64..50.0) {
        let f = random_smooth_field(grid(), seed, 12, 4.0);
        let a = besov_norm(&f.scaled(c), &spec(), mollifier()).unwrap();
        let b = c.abs() * besov_norm(&f, &spec(), mollifier()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn besov_norm_satisfies_the_triangle_inequality(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let f = random_smooth_field(grid(), s1, 12, 4.0);
        let g = random_smooth_field(grid(), s2, 20, 3.0);
        let m = mollifier();
        let lhs = besov_norm(&f.try_add(&g).unwrap(), &spec(), m).unwrap();
        let rhs = besov_norm(&f, &spec(), m).unwrap() + besov_norm(&g, &spec(), m).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn transform_of_real_field_is_hermitian(seed in 0u64..10_000) {
        let f = random_smooth_field(grid(), seed, 30, 5.0);
        let s = forward_transform(&f);
        let g = grid();
        let peak = s.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for i in 0..g.len() {
            if !g.is_nyquist(i) {
                prop_assert!((s.coeffs()[g.negated_index(i)] - s.coeffs()[i].conj()).norm() <= 1e-13 * peak);
            }
        }
        let back = inverse_transform(&s).unwrap();
        prop_assert!(back.try_sub(&f).unwrap().max_abs() <= 1e-13 * f.max_abs());
    }

    #[test]
    fn product_is_commutative(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let f = random_smooth_field(grid(), s1, 10, 4.0);
        let g = random_smooth_field(grid(), s2, 10, 4.0);
        let a = product(&f, &g).unwrap();
        let b = product(&g, &f).unwrap();
        prop_assert!(a.try_sub(&b).unwrap().max_abs() <= 1e-13 * a.max_abs().max(1e-300));
    }

    #[test]
    fn coarse_partitions_nest_in_fine_ones(level in 0u32..14, drop in 0u32..6, horizon in 0.01f64..=1.0) {
        let fine = DyadicPartition::new(horizon, level + drop).unwrap();
        let coarse = fine.coarsened(level).unwrap();
        let pts = fine.points();
        for (m, t) in coarse.points().iter().enumerate() {
            prop_assert_eq!(*t, pts[m << drop]);
            prop_assert_eq!(fine.cell_of(*t).unwrap(), m << drop);
        }
    }
}
