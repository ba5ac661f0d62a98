//! Gauss–Legendre rules and composite quadrature on intervals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Cached rule; nodes come from Newton iteration on `P_order`.
    pub fn new(order: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(order).or_insert_with(|| Arc::new(Self::compute(order))).clone()
    }

    fn compute(order: usize) -> GaussLegendre {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over `[a, b]` split into `panels` equal pieces.
pub fn composite(a: f64, b: f64, panels: usize, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = GaussLegendre::new(order);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * w;
            rule.integrate(lo, lo + w, &f)
        })
        .sum()
}

/// Composite rule over consecutive breakpoints (sorted, deduplicated inside).
pub fn piecewise(
    breakpoints: &[f64],
    panels: usize,
    order: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let mut pts = breakpoints.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts.windows(2).map(|w| composite(w[0], w[1], panels, order, &f)).sum()
}

/// Like [`piecewise`], but each piece is mapped through the smoothstep
/// `u -> 3u^2 - 2u^3`, which clusters nodes at both ends and turns
/// square-root endpoint behaviour into a smooth integrand.
pub fn piecewise_graded(
    breakpoints: &[f64],
    panels: usize,
    order: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let mut pts = breakpoints.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts.windows(2)
        .map(|w| {
            let (a, len) = (w[0], w[1] - w[0]);
            composite(0.0, 1.0, panels, order, |u| {
                let x = a + len * u * u * (3.0 - 2.0 * u);
                f(x) * len * 6.0 * u * (1.0 - u)
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // Degree 9 is the highest exact degree for five nodes.
        let v = rule.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn high_order_rule_is_accurate() {
        let rule = GaussLegendre::new(200);
        let v = rule.integrate(0.0, std::f64::consts::PI, |x| (40.0 * x).cos().powi(2));
        assert!((v - std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn graded_rule_handles_square_root_endpoints() {
        let v = piecewise_graded(&[0.0, 1.0], 4, 16, |x| (x * (1.0 - x)).sqrt());
        assert!((v - std::f64::consts::PI / 8.0).abs() < 1e-10);
    }

    #[test]
    fn piecewise_handles_kinks() {
        let v = piecewise(&[-1.0, 0.3, 1.0], 4, 8, |x| (x - 0.3).abs());
        assert!((v - (1.3f64.powi(2) + 0.7f64.powi(2)) / 2.0).abs() < 1e-13);
    }
}
