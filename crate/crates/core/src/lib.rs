//! Spectral tools for the stochastic wave equation with multiplicative
//! Gaussian noise that is rough in time and space.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod besov;
pub mod error;
pub mod grid;
pub mod noise;
pub mod quadrature;
pub mod solver;
pub mod stats;
pub mod wave_kernel;
pub mod young;

pub use error::{Error, Result};
