//! The wave propagator `G_t` (Fourier multiplier `sin(t|xi|)/|xi|`), its time
//! derivative (`cos(t|xi|)`), L¹ norms of kernel differences, the dilation
//! quantity `K_{t,j}`, and measured smoothing ratios in Besov scales.
//!
//! In space, `G_t = 1/2 1_{|x|<t}` in one dimension and
//! `G_t = (2 pi)^{-1} (t^2 - |x|^2)^{-1/2} 1_{|x|<t}` in two.

use std::f64::consts::PI;

use crate::besov::{besov_block_norms, combine_levels, BesovSpec, Mollifier};
use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, Field, SpectralField};
use crate::quadrature::{composite, piecewise, piecewise_graded};

/// Smoothing exponent of the propagator: 1 in one dimension, 1/2 in two.
pub fn rho(dim: usize) -> f64 {
    if dim == 1 {
        1.0
    } else {
        0.5
    }
}

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange(format!("propagation time {t} must lie in [0, 1]")))
    }
}

/// `sin(t xi)/xi` with its limit `t` at `xi = 0`.
#[inline]
pub fn propagator_symbol(t: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        t
    } else {
        (t * xi).sin() / xi
    }
}

/// `G_t` applied to a spectrum (no range or support checks).
pub fn propagate_spectrum(t: f64, s: &SpectralField) -> SpectralField {
    let grid = *s.grid();
    s.apply_multiplier(|i| propagator_symbol(t, grid.frequency_norm(i)))
}

/// `(d/dt) G_t` applied to a spectrum (no range or support checks).
pub fn propagate_derivative_spectrum(t: f64, s: &SpectralField) -> SpectralField {
    let grid = *s.grid();
    s.apply_multiplier(|i| (t * grid.frequency_norm(i)).cos())
}

pub fn apply_g(t: f64, f: &Field) -> Result<Field> {
    check_time(t)?;
    f.check_propagation(t)?;
    if t == 0.0 {
        return Ok(Field::zeros(*f.grid()));
    }
    inverse_transform(&propagate_spectrum(t, &forward_transform(f)))
}

/// At `t = 0` the multiplier is identically one and `f` is returned as is.
pub fn apply_dtg(t: f64, f: &Field) -> Result<Field> {
    check_time(t)?;
    f.check_propagation(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    inverse_transform(&propagate_derivative_spectrum(t, &forward_transform(f)))
}

fn check_pair(s: f64, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) || s > t {
        return Err(Error::BadTimeOrder { s, t });
    }
    Ok(())
}

/// Default panel count for the radial quadratures below.
pub const DEFAULT_PANELS: usize = 16;
const ORDER: usize = 16;

/// `||G_t - G_s||_{L^1}`.
pub fn kernel_l1_diff(dim: usize, s: f64, t: f64) -> Result<f64> {
    kernel_l1_diff_with(dim, s, t, DEFAULT_PANELS)
}

/// [`kernel_l1_diff`] with an explicit number of quadrature panels per piece
/// (two-dimensional case only; the one-dimensional value is exact).
pub fn kernel_l1_diff_with(dim: usize, s: f64, t: f64, panels: usize) -> Result<f64> {
    check_pair(s, t)?;
    match dim {
        1 => Ok(t - s),
        2 => {
            if s == t {
                return Ok(0.0);
            }
            // With the angular factor cancelled, the norm is
            //   \int_s^t r dr / sqrt(t^2 - r^2)
            // + \int_0^s r |1/sqrt(s^2 - r^2) - 1/sqrt(t^2 - r^2)| dr.
            // r = sqrt(t^2 - v^2) turns the first into \int_0^{sqrt(t^2-s^2)} dv and
            // r = sqrt(s^2 - v^2) turns the second into
            //   \int_0^s (1 - v / sqrt(t^2 - s^2 + v^2)) dv.
            let c2 = t * t - s * s;
            let c = c2.sqrt();
            let outer = composite(0.0, c, panels, ORDER, |_| 1.0);
            let integrand = |v: f64| 1.0 - v / (c2 + v * v).sqrt();
            // The integrand varies on the scale sqrt(c2) near v = 0: grade
            // the breakpoints geometrically from there up to s.
            let mut breaks = vec![0.0];
            let mut b = c.min(s);
            while b < s {
                breaks.push(b);
                b *= 2.0;
            }
            breaks.push(s);
            let inner = piecewise(&breaks, panels, ORDER, integrand);
            Ok(outer + inner)
        }
        _ => Err(Error::ParamOutOfRange(format!("dimension {dim} is not supported"))),
    }
}

/// `||G_t(. - h) - G_t||_{L^1}` with `|h| = rho`.
pub fn translation_l1_diff(dim: usize, t: f64, rho: f64) -> f64 {
    translation_l1_diff_with(dim, t, rho, DEFAULT_PANELS)
}

pub fn translation_l1_diff_with(dim: usize, t: f64, rho: f64, panels: usize) -> f64 {
    let rho = rho.abs();
    if t <= 0.0 || rho == 0.0 {
        return 0.0;
    }
    if dim == 1 {
        return rho.min(2.0 * t);
    }
    if rho >= 2.0 * t {
        // Disjoint supports.
        return 2.0 * t;
    }
    // ||a - b||_1 = ||a||_1 + ||b||_1 - 2 \int min(a, b), and by symmetry
    // about the bisector the overlap is twice the integral over the half
    // plane nearer the origin, where the smaller value is G_t itself:
    //   overlap = (1/pi) \int_0^t Phi(r) r dr / sqrt(t^2 - r^2),
    // Phi(r) being the angle of the circle |y| = r inside the half-plane and
    // inside the shifted disc. r = sqrt(t^2 - v^2) removes the singularity.
    let angle = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let lo = ((r * r + rho * rho - t * t) / (2.0 * r * rho)).clamp(-1.0, 1.0);
        let hi = (rho / (2.0 * r)).clamp(-1.0, 1.0);
        (2.0 * (lo.acos() - hi.acos())).max(0.0)
    };
    let mut breaks = vec![0.0, t];
    for r in [t - rho, rho / 2.0, rho - t] {
        if r > 0.0 && r < t {
            breaks.push((t * t - r * r).sqrt());
        }
    }
    let overlap = piecewise_graded(&breaks, panels, ORDER, |v| angle((t * t - v * v).max(0.0).sqrt())) / PI;
    (2.0 * t - 2.0 * overlap).max(0.0)
}

/// `||K_{t,j}||_{L^1}` where
/// `K_{t,j}(y) = 2^{j rho_d} \int_{|z| < 2} |G_t(y - 2^{-j} z) - G_t(y)| dz`.
pub fn kcal_quantity(dim: usize, t: f64, j: u32) -> Result<f64> {
    kcal_quantity_with(dim, t, j, DEFAULT_PANELS)
}

pub fn kcal_quantity_with(dim: usize, t: f64, j: u32, panels: usize) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let scale = 2f64.powi(-(j as i32));
    let pref = 2f64.powf(j as f64 * rho(dim));
    match dim {
        1 => {
            // \int_{-2}^{2} min(2^{-j}|z|, 2t) dz in closed form.
            let knee = 2.0 * t / scale;
            let half = if knee >= 2.0 {
                scale * 2.0
            } else {
                scale * knee * knee / 2.0 + 2.0 * t * (2.0 - knee)
            };
            Ok(pref * 2.0 * half)
        }
        2 => {
            // Fubini: \int_{|z|<2} ||G_t(. - 2^{-j} z) - G_t||_{L^1} dz, radial in z.
            let knee = 2.0 * t / scale;
            let mut breaks = vec![0.0, 2.0];
            for r in [knee / 3.0, knee / 2.0, knee] {
                if r > 0.0 && r < 2.0 {
                    breaks.push(r);
                }
            }
            let inner_panels = (panels / 2).max(2);
            let v = piecewise_graded(&breaks, panels, ORDER, |r| {
                translation_l1_diff_with(2, t, scale * r, inner_panels) * r
            });
            Ok(pref * 2.0 * PI * v)
        }
        _ => Err(Error::ParamOutOfRange(format!("dimension {dim} is not supported"))),
    }
}

/// Pointwise value `K_{t,j}(y)` at distance `|y| = radius` from the origin
/// (the function is radial).
pub fn kcal_pointwise(dim: usize, t: f64, j: u32, radius: f64) -> Result<f64> {
    check_time(t)?;
    let y = radius.abs();
    let scale = 2f64.powi(-(j as i32));
    let pref = 2f64.powf(j as f64 * rho(dim));
    if t == 0.0 {
        return Ok(0.0);
    }
    match dim {
        1 => {
            // Measure of z in [-2, 2] where 1_{|y - 2^{-j} z| < t} differs from 1_{|y| < t},
            // times the kernel height 1/2.
            let (a, b) = ((y - t) / scale, (y + t) / scale);
            let overlap = (b.min(2.0) - a.max(-2.0)).max(0.0);
            let differ = if y < t { 4.0 - overlap } else { overlap };
            Ok(pref * 0.5 * differ)
        }
        2 => {
            // Substituting w = y - 2^{-j} z: 4^j \int_{|w - y| < R} |G_t(w) - G_t(y)| dw
            // with R = 2^{1-j}. The integrand is radial in w, so only the
            // angular measure of each circle |w| = r inside the disc matters.
            let r_disc = 2.0 * scale;
            let c = if y < t { 1.0 / (2.0 * PI * (t * t - y * y).sqrt()) } else { 0.0 };
            let angle = |r: f64| -> f64 {
                if y == 0.0 {
                    return if r <= r_disc { 2.0 * PI } else { 0.0 };
                }
                if r == 0.0 {
                    return if y <= r_disc { 2.0 * PI } else { 0.0 };
                }
                let cos_lo = ((r * r + y * y - r_disc * r_disc) / (2.0 * r * y)).clamp(-1.0, 1.0);
                2.0 * cos_lo.acos()
            };
            let lo = (y - r_disc).max(0.0);
            let hi = y + r_disc;
            let mut total = 0.0;
            if lo < t {
                // Inside the light cone, r = sqrt(t^2 - v^2):
                //   \int |g(r) - c| Phi(r) r dr = \int |1/(2 pi) - c v| Phi(r(v)) dv.
                let v_top = (t * t - lo * lo).sqrt();
                let v_bot = (t * t - hi.min(t).powi(2)).max(0.0).sqrt();
                let mut breaks = vec![v_bot, v_top];
                if c > 0.0 {
                    let kink = 1.0 / (2.0 * PI * c);
                    if kink > v_bot && kink < v_top {
                        breaks.push(kink);
                    }
                }
                for r in [y - r_disc, y + r_disc, r_disc - y] {
                    if r > lo && r < hi.min(t) {
                        breaks.push((t * t - r * r).sqrt());
                    }
                }
                total += piecewise_graded(&breaks, DEFAULT_PANELS, ORDER, |v| {
                    let r = (t * t - v * v).max(0.0).sqrt();
                    (1.0 / (2.0 * PI) - c * v).abs() * angle(r)
                });
            }
            if hi > t && c > 0.0 {
                let mut breaks = vec![lo.max(t), hi];
                for r in [y - r_disc, r_disc - y] {
                    if r > lo.max(t) && r < hi {
                        breaks.push(r);
                    }
                }
                total += piecewise_graded(&breaks, DEFAULT_PANELS, ORDER, |r| c * angle(r) * r);
            }
            Ok(pref * 4f64.powi(j as i32) * total)
        }
        _ => Err(Error::ParamOutOfRange(format!("dimension {dim} is not supported"))),
    }
}

fn check_smoothing_params(dim: usize, alpha: f64, kappa: Option<f64>) -> Result<()> {
    if !(alpha <= 0.0) {
        return Err(Error::ParamOutOfRange(format!("alpha = {alpha} must be <= 0")));
    }
    if let Some(k) = kappa {
        if !(0.0..=rho(dim)).contains(&k) {
            return Err(Error::ParamOutOfRange(format!(
                "kappa = {k} must lie in [0, {}]",
                rho(dim)
            )));
        }
    }
    Ok(())
}

/// Block norms of `(G_t - G_s) f` (the multiplier is applied spectrally, without
/// support checks, so periodic test fields are allowed).
pub fn increment_block_norms(f: &Field, s: f64, t: f64, p: f64, spec: &BesovSpec, m: &Mollifier) -> Result<Vec<f64>> {
    check_pair(s, t)?;
    let grid = *f.grid();
    let diff = forward_transform(f).apply_multiplier(|i| {
        let xi = grid.frequency_norm(i);
        propagator_symbol(t, xi) - propagator_symbol(s, xi)
    });
    besov_block_norms(&inverse_transform(&diff)?, p, spec.weight, m)
}

/// `||(G_t - G_s) f||_{B^{alpha+kappa}} / (|t-s|^{rho_d - kappa} ||f||_{B^alpha})`,
/// with `p`, `q` and the weight taken from `spec` (its `s` is ignored).
#[allow(clippy::too_many_arguments)]
pub fn strichartz_ratio(
    f: &Field,
    s: f64,
    t: f64,
    alpha: f64,
    kappa: f64,
    spec: &BesovSpec,
    m: &Mollifier,
) -> Result<f64> {
    let dim = f.grid().dim();
    check_smoothing_params(dim, alpha, Some(kappa))?;
    if !(s < t) {
        return Err(Error::ParamOutOfRange(format!("need s < t (got {s}, {t})")));
    }
    let num = combine_levels(&increment_block_norms(f, s, t, spec.p, spec, m)?, alpha + kappa, spec.q);
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = combine_levels(&besov_block_norms(f, spec.p, spec.weight, m)?, alpha, spec.q);
    Ok(num / ((t - s).powf(rho(dim) - kappa) * den))
}

/// `||G_t f||_{B^{alpha + rho_d}} / ||f||_{B^alpha}`.
pub fn smoothing_ratio(f: &Field, t: f64, alpha: f64, spec: &BesovSpec, m: &Mollifier) -> Result<f64> {
    let dim = f.grid().dim();
    check_smoothing_params(dim, alpha, None)?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let num = combine_levels(&increment_block_norms(f, 0.0, t, spec.p, spec, m)?, alpha + rho(dim), spec.q);
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = combine_levels(&besov_block_norms(f, spec.p, spec.weight, m)?, alpha, spec.q);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxGrid;

    #[test]
    fn one_dimensional_difference_is_exact() {
        assert_eq!(kernel_l1_diff(1, 0.2, 0.5).unwrap(), 0.5 - 0.2);
        assert!(matches!(kernel_l1_diff(1, 0.5, 0.2), Err(Error::BadTimeOrder { .. })));
        assert!(matches!(kernel_l1_diff(2, 0.5, 1.5), Err(Error::BadTimeOrder { .. })));
    }

    #[test]
    fn two_dimensional_difference_matches_closed_form() {
        // Integrating both pieces exactly gives 2 sqrt(t^2 - s^2) - (t - s).
        for &(s, t) in &[(0.0f64, 1.0f64), (0.2, 0.5), (0.49, 0.5), (0.9999, 1.0), (0.3, 0.3)] {
            let exact = 2.0 * (t * t - s * s).sqrt() - (t - s);
            let v = kernel_l1_diff(2, s, t).unwrap();
            assert!((v - exact).abs() < 1e-12, "s={s} t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn translation_difference_limits() {
        for &t in &[0.3, 1.0] {
            assert!(translation_l1_diff(2, t, 1e-9) < 1e-3);
            assert!((translation_l1_diff(2, t, 2.0 * t) - 2.0 * t).abs() < 1e-12);
            assert!((translation_l1_diff(2, t, 5.0) - 2.0 * t).abs() < 1e-12);
            assert!((translation_l1_diff(1, t, 0.1) - 0.1f64.min(2.0 * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn kcal_vanishes_at_time_zero_and_outside_support() {
        assert_eq!(kcal_quantity(1, 0.0, 3).unwrap(), 0.0);
        assert_eq!(kcal_quantity(2, 0.0, 3).unwrap(), 0.0);
        for dim in [1, 2] {
            for j in [0, 3] {
                assert_eq!(kcal_pointwise(dim, 0.5, j, 2.5001).unwrap(), 0.0);
                assert!(kcal_pointwise(dim, 0.5, j, 0.4).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn one_dimensional_pointwise_integrates_to_norm() {
        let (t, j) = (0.4, 2);
        let integral = 2.0 * composite(0.0, 3.0, 600, 8, |y| kcal_pointwise(1, t, j, y).unwrap());
        let v = kcal_quantity(1, t, j).unwrap();
        assert!((integral - v).abs() < 1e-3 * v, "{integral} vs {v}");
    }

    #[test]
    fn propagator_of_constant() {
        for dim in [1, 2] {
            let g = BoxGrid::new(dim, 32, 4.0).unwrap();
            let out = apply_g(0.7, &Field::constant(g, 1.0)).unwrap();
            assert!(out.samples().iter().all(|v| (v - 0.7).abs() < 1e-12));
            let zero = apply_g(0.0, &Field::constant(g, 3.0)).unwrap();
            assert!(zero.max_abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_times_outside_unit_interval() {
        let g = BoxGrid::new(1, 32, 4.0).unwrap();
        assert!(apply_g(1.5, &Field::zeros(g)).is_err());
        assert!(apply_dtg(-0.1, &Field::zeros(g)).is_err());
    }
}
