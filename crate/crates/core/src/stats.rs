//! Small statistics helpers for rate fits and Monte-Carlo error bars.

use serde::{Deserialize, Serialize};

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit { slope, intercept, r_squared })
}

/// Fit of `log2 y` against `log2 x`; non-positive samples are skipped.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.log2(), y.log2()))
        .unzip();
    linear_fit(&lx, &ly)
}

/// Fit of `y ~ C 2^{-eps n}`, returned as `(eps, C, r_squared)`.
pub fn dyadic_rate_fit(levels: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (*x, y.log2()))
        .unzip();
    let fit = linear_fit(&lx, &ly)?;
    Some((-fit.slope, 2f64.powf(fit.intercept), fit.r_squared))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Delete-one-group jackknife standard error of a statistic.
pub fn jackknife_stderr(samples: &[f64], groups: usize, stat: impl Fn(&[f64]) -> f64) -> f64 {
    let n = samples.len();
    let g = groups.clamp(2, n.max(2));
    let size = n / g;
    let estimates: Vec<f64> = (0..g)
        .map(|k| {
            let rest: Vec<f64> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| *i / size != k || *i >= g * size)
                .map(|(_, v)| *v)
                .collect();
            stat(&rest)
        })
        .collect();
    let m = mean(&estimates);
    let var: f64 = estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>() * (g as f64 - 1.0) / g as f64;
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dyadic_rate() {
        let n = [3.0, 4.0, 5.0, 6.0];
        let ys: Vec<f64> = n.iter().map(|k| 5.0 * 2f64.powf(-0.25 * k)).collect();
        let (eps, c, r2) = dyadic_rate_fit(&n, &ys).unwrap();
        assert!((eps - 0.25).abs() < 1e-12 && (c - 5.0).abs() < 1e-12 && r2 > 0.999);
    }

    #[test]
    fn jackknife_of_mean_matches_classical_error() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
        let se = jackknife_stderr(&v, v.len(), mean);
        let m = mean(&v);
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt();
        assert!((se - sd / (v.len() as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
