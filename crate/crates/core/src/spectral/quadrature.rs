use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::kernel::gauss_density;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on `[0, L]`.
///
/// Weights integrate against Lebesgue measure; the Gaussian density is kept
/// separate (see [`QuadratureRule::density_weights`]).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    density_weights: Vec<f64>,
    length: f64,
    panels: usize,
    nodes_per_panel: usize,
}

/// Split `[0, length]` into `panels` equal panels with `nodes_per_panel`
/// Gauss-Legendre nodes each.
pub fn build_rule(nodes_per_panel: usize, panels: usize, length: f64) -> Result<QuadratureRule> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::invalid(
            "L",
            format!("must be positive and finite, got {length}"),
        ));
    }
    if nodes_per_panel < 2 {
        return Err(Error::invalid(
            "nodes_per_panel",
            format!("must be >= 2, got {nodes_per_panel}"),
        ));
    }
    if panels == 0 {
        return Err(Error::invalid("panels", "must be >= 1"));
    }
    let (ref_nodes, ref_weights) = gauss_legendre(nodes_per_panel);
    let width = length / panels as f64;
    let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
    let mut weights = Vec::with_capacity(panels * nodes_per_panel);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (t, w) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + 0.5 * width * t);
            weights.push(0.5 * width * w);
        }
    }
    let density_weights = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * gauss_density(x))
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        density_weights,
        length,
        panels,
        nodes_per_panel,
    })
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `w_i * phi(x_i)`: the rule for integration against `gamma`.
    pub fn density_weights(&self) -> &[f64] {
        &self.density_weights
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_0^L f dgamma` by the rule.
    pub fn integrate_gaussian(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.density_weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_eval;

    #[test]
    fn reference_rule_is_exact_for_polynomials() {
        for n in 2..=20 {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert!(w.iter().all(|&v| v > 0.0));
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn default_rule_examples() {
        let rule = build_rule(16, 8, 10.0).unwrap();
        assert_eq!(rule.len(), 128);
        assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(rule.nodes()[0] > 0.0 && *rule.nodes().last().unwrap() < 10.0);
        assert!((rule.integrate_gaussian(|_| 1.0) - 0.5).abs() < 1e-12);
        let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
        assert!((rule.integrate_gaussian(|y| y) - inv_sqrt_2pi).abs() < 1e-10);
        let h4 = rule.integrate_gaussian(|y| hermite_eval(4, y).powi(2)) / 24.0;
        assert!((h4 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_rule(16, 8, 0.0).is_err());
        assert!(build_rule(16, 8, -1.0).is_err());
        assert!(build_rule(16, 8, f64::NAN).is_err());
        assert!(build_rule(1, 8, 10.0).is_err());
        assert!(build_rule(16, 0, 10.0).is_err());
    }
}
