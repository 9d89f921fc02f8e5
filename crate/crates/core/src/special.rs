//! Gamma-function helpers and Gauss-Legendre quadrature.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// `ln Γ(x) - ln Γ(x + d)` for `x > 0`, `x + d > 0`.
///
/// For large `x` the two log-gamma values are huge and nearly equal, so the
/// difference is taken from the Stirling series term by term instead.
pub fn ln_gamma_ratio(x: f64, d: f64) -> f64 {
    if x < 30.0 || x + d < 30.0 {
        return ln_gamma(x) - ln_gamma(x + d);
    }
    let y = x + d;
    // (x - 1/2) ln x - x  -  [(y - 1/2) ln y - y]
    let main = -d * x.ln() - (y - 0.5) * (d / x).ln_1p() + d;
    main + stirling_tail(x) - stirling_tail(y)
}

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    let inv = 1.0 / x;
    inv * (1.0 / 12.0 - 1.0 / (360.0 * x2) * (1.0 - 360.0 / (1260.0 * x2) * (1.0 - 1260.0 / (1680.0 * x2))))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
