//! Quadrature rules built on Gauss–Legendre panels.

use std::f64::consts::FRAC_PI_2;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Concatenation of two rules (disjoint intervals assumed).
    pub fn join(mut self, other: Rule) -> Rule {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self
    }
}

/// Gauss–Legendre nodes on [-1, 1], ascending.
pub fn legendre(order: usize) -> Rule {
    let order = NonZeroUsize::new(order.max(1)).expect("nonzero");
    let gl = GaussLegendre::new(order);
    let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Composite Gauss–Legendre rule with `panels` equal panels on [a, b].
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
    let base = legendre(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * base.len());
    let mut weights = Vec::with_capacity(panels * base.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    Rule { nodes, weights }
}

/// Composite rule whose panel width does not exceed `max_width`.
pub fn panels_by_width(a: f64, b: f64, max_width: f64, order: usize) -> Rule {
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    composite(a, b, panels, order)
}

/// Rule for the whole real line via x = scale·tan(θ). Exponentially
/// convergent for integrands that are rational-like with O(1/x²) decay.
pub fn real_line(scale: f64, order: usize) -> Rule {
    let base = composite(-FRAC_PI_2, FRAC_PI_2, 4, order);
    let mut nodes = Vec::with_capacity(base.len());
    let mut weights = Vec::with_capacity(base.len());
    for (th, w) in base.nodes.iter().zip(&base.weights) {
        let c = th.cos();
        nodes.push(scale * th.tan());
        weights.push(w * scale / (c * c));
    }
    Rule { nodes, weights }
}

/// Declared quadrature for spatial momentum integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Momentum cutoff K; integration runs over [-K, K] per axis.
    pub cutoff: f64,
    /// Maximal panel width in momentum units.
    pub panel_width: f64,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Relative tolerance used for the tail estimate.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            cutoff: 60.0,
            panel_width: 1.0,
            order: 16,
            tolerance: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn rule(&self) -> Rule {
        panels_by_width(-self.cutoff, self.cutoff, self.panel_width, self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = legendre(8);
        let v = r.integrate(|x| x.powi(14) + 3.0 * x.powi(3));
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn composite_handles_oscillation() {
        let r = composite(0.0, 40.0, 40, 16);
        let v = r.integrate(|x| (3.0 * x).cos());
        assert!((v - (120.0f64).sin() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn real_line_lorentzian() {
        let r = real_line(1.3, 24);
        let v = r.integrate(|x| 1.0 / (x * x + 4.0));
        assert!((v - std::f64::consts::PI / 2.0).abs() < 1e-13);
    }
}
