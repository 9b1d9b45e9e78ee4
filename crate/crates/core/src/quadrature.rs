//! Composite Gauss–Legendre quadrature on a finite interval.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Points per panel used by every composite rule in this crate.
pub const PANEL_ORDER: usize = 16;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for i in 0..order {
        // Newton from the Tricomi initial guess; converges in a handful of steps.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (order as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d.is_finite() {
            dp = d;
        }
        nodes.push(-x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Equal-width panels of a fixed-order Gauss–Legendre rule over `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    panels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize) -> Self {
        let panels = panels.max(1);
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * width * wi);
            }
        }
        Self {
            panels,
            nodes,
            weights,
        }
    }

    /// Rule with at least `points` nodes (rounded up to whole panels).
    pub fn with_points(a: f64, b: f64, points: usize) -> Self {
        Self::new(a, b, points.div_ceil(PANEL_ORDER))
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node/weight pairs grouped by panel.
    pub fn panel_chunks(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.nodes
            .chunks(PANEL_ORDER)
            .zip(self.weights.chunks(PANEL_ORDER))
    }

    /// Integrates a scalar function; panel sums are accumulated separately
    /// before being added together.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.panel_chunks()
            .map(|(xs, ws)| xs.iter().zip(ws).map(|(&x, &w)| w * f(x)).sum::<f64>())
            .sum()
    }
}
