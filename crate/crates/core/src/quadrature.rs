//! One-dimensional quadrature rules used by the spherical-integral oracles.

use std::f64::consts::PI;

/// Nodes and weights of a rule mapped onto an interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Composite midpoint rule with `n` cells on `[lo, hi]`.
    pub fn midpoint(n: usize, lo: f64, hi: f64) -> Self {
        assert!(n > 0);
        let h = (hi - lo) / n as f64;
        Self {
            nodes: (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        }
    }

    /// `n`-point Gauss–Legendre rule on `[lo, hi]`.
    pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Self {
        assert!(n > 0);
        let mid = 0.5 * (hi + lo);
        let half = 0.5 * (hi - lo);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
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
            nodes[i] = mid - half * x;
            nodes[n - 1 - i] = mid + half * x;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 64, 512] {
            let rule = Rule::gauss_legendre(n, -1.0, 2.0);
            let deg = 2 * n - 1;
            let deg = deg.min(9) as i32;
            let exact = (2f64.powi(deg + 1) - (-1f64).powi(deg + 1)) / (deg + 1) as f64;
            let got = rule.integrate(|x| x.powi(deg));
            assert!((got - exact).abs() < 1e-11 * exact.abs().max(1.0), "n={n}");
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hemisphere_cosine_integral() {
        // ∫_0^{π/2} cos θ sin θ dθ = 1/2
        let gl = Rule::gauss_legendre(512, 0.0, PI / 2.0);
        assert!((gl.integrate(|t| t.cos() * t.sin()) - 0.5).abs() < 1e-15);
        let mid = Rule::midpoint(512, 0.0, PI / 2.0);
        let err = (mid.integrate(|t| t.cos() * t.sin()) - 0.5).abs();
        // O(h²) endpoint error, h²/12
        let h = PI / 2.0 / 512.0;
        assert!((err - h * h / 12.0).abs() < 1e-3 * h * h);
    }

    #[test]
    fn nodes_are_sorted_and_interior() {
        let rule = Rule::gauss_legendre(33, 0.0, 1.0);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes[0] > 0.0 && rule.nodes[32] < 1.0);
        assert!((rule.nodes[16] - 0.5).abs() < 1e-15);
    }
}
