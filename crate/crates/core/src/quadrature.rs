//! Gauss–Legendre rules on `[0, 1]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an `order`-point Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::Invalid(format!(
                "quadrature order must be at least 2, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots are symmetric; Newton on P_n from the Tricomi-style initial guess.
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.pairs().map(|(t, w)| w * f(t)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_nodes_are_sorted() {
        for n in [2, 3, 7, 32, 64] {
            let q = GaussLegendre::new(n).unwrap();
            let s: f64 = q.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "order {n}: {s}");
            assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(q.nodes().iter().all(|&t| t > 0.0 && t < 1.0));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let q = GaussLegendre::new(5).unwrap();
        for deg in 0..10 {
            let got = q.integrate(|t| t.powi(deg));
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn two_point_rule() {
        let q = GaussLegendre::new(2).unwrap();
        let r = 0.5 / 3f64.sqrt();
        assert!((q.nodes()[0] - (0.5 - r)).abs() < 1e-15);
        assert!((q.weights()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrand() {
        let q = GaussLegendre::new(32).unwrap();
        let got = q.integrate(|t| (PI * t).cos() * t.exp());
        // ∫ e^t cos(πt) dt = (e^t (cos πt + π sin πt))/(1 + π²) from 0 to 1
        let want = (-(1f64.exp()) - 1.0) / (1.0 + PI * PI);
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn order_below_two_is_rejected() {
        assert!(GaussLegendre::new(1).is_err());
    }
}
