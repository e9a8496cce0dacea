//! Gauss–Legendre rules on `[-1, 1]`, cached per order.

use std::sync::OnceLock;

pub const MAX_ORDER: usize = 64;

#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x = 0.0;
            dp = 1.0;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// `n`-point rule, `1 <= n <= MAX_ORDER`.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    assert!((1..=MAX_ORDER).contains(&n), "unsupported Gauss order {n}");
    &RULES.get_or_init(|| (1..=MAX_ORDER).map(compute).collect())[n - 1]
}

/// Rule mapped to `[a, b]`.
pub fn gauss_on(n: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let r = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    r.nodes.iter().zip(&r.weights).map(move |(&x, &w)| (m + h * x, h * w))
}

/// Adaptive Gauss–Legendre on `[a, b]` by interval bisection, comparing an
/// `n`-point estimate with the sum over the two halves.
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, n: usize, tol: f64, depth: u32) -> f64 {
    let whole: f64 = gauss_on(n, a, b).map(|(x, w)| w * f(x)).sum();
    refine(f, a, b, n, tol, depth, whole)
}

fn refine<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, n: usize, tol: f64, depth: u32, whole: f64) -> f64 {
    let m = 0.5 * (a + b);
    let left: f64 = gauss_on(n, a, m).map(|(x, w)| w * f(x)).sum();
    let right: f64 = gauss_on(n, m, b).map(|(x, w)| w * f(x)).sum();
    let both = left + right;
    if depth == 0 || (both - whole).abs() <= tol * both.abs().max(1e-300) {
        return both;
    }
    refine(f, a, m, n, tol, depth - 1, left) + refine(f, m, b, n, tol, depth - 1, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64] {
            let r = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            let p = 2 * n - 2;
            let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
            assert!((v - 2.0 / (p as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive(&mut |x: f64| x.powf(-0.25), 0.0, 1.0, 8, 1e-12, 60);
        assert!((v - 4.0 / 3.0).abs() < 1e-9, "{v}");
    }
}
