//! Gauss-Legendre rules and the dyadic time mesh used for extension integrals.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if q == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=q {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(q: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(q);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (x.iter().map(|v| mid + half * v).collect(), w.iter().map(|v| half * v).collect())
}

/// Composite rule on `(t_floor, r_max]` with panels
/// `[r_max 2^{-(m+1)}, r_max 2^{-m}]`, `m = 0..M`. Nodes are stored ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    r_max: f64,
    panels: usize,
    nodes_per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeMesh {
    pub const DEFAULT_PANELS: usize = 20;
    pub const DEFAULT_NODES_PER_PANEL: usize = 8;

    pub fn new(r_max: f64, panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Domain(format!("mesh top must be positive, got {r_max}")));
        }
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        for m in (0..panels).rev() {
            let a = r_max * 0.5f64.powi(m as i32 + 1);
            let b = r_max * 0.5f64.powi(m as i32);
            let (x, w) = gauss_legendre_on(nodes_per_panel, a, b);
            nodes.extend(x);
            weights.extend(w);
        }
        Ok(Self { r_max, panels, nodes_per_panel, nodes, weights })
    }

    pub fn with_defaults(r_max: f64) -> Result<Self> {
        Self::new(r_max, Self::DEFAULT_PANELS, Self::DEFAULT_NODES_PER_PANEL)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `r_max 2^{-M}`; the mesh integrates over `(t_floor, r_max]`.
    pub fn t_floor(&self) -> f64 {
        self.r_max * 0.5f64.powi(self.panels as i32)
    }

    /// Node indices of panel `m`.
    pub fn panel_range(&self, m: usize) -> Range<usize> {
        let q = self.nodes_per_panel;
        (self.panels - 1 - m) * q..(self.panels - m) * q
    }

    /// Number of leading nodes covering `(t_floor, height]`. `height` must be
    /// a panel boundary `r_max 2^{-p}` with `p < M`.
    pub fn node_count_below(&self, height: f64) -> Result<usize> {
        let p = (self.r_max / height).log2();
        let pr = p.round();
        if !(height > 0.0) || (p - pr).abs() > 1e-9 || pr < 0.0 || pr >= self.panels as f64 {
            return Err(Error::MeshMismatch(format!(
                "height {height} is not a panel boundary of a mesh with top {} and {} panels",
                self.r_max, self.panels
            )));
        }
        Ok((self.panels - pr as usize) * self.nodes_per_panel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_2q_minus_1() {
        for q in 1..=12 {
            let (x, w) = gauss_legendre(q);
            for deg in 0..2 * q {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-14, "q={q} deg={deg} {got} {exact}");
            }
        }
    }

    #[test]
    fn mesh_nodes_increase_and_panels_sum_to_length() {
        let mesh = TimeMesh::with_defaults(0.5).unwrap();
        assert!(mesh.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(mesh.nodes()[0] > mesh.t_floor());
        assert!(*mesh.nodes().last().unwrap() <= 0.5);
        for m in 0..mesh.panels() {
            let len = 0.5 * 0.5f64.powi(m as i32 + 1);
            let s: f64 = mesh.weights()[mesh.panel_range(m)].iter().sum();
            assert!((s - len).abs() <= 1e-14 * len.max(1e-300) + 1e-300, "panel {m}");
        }
    }

    #[test]
    fn node_count_below_panel_boundaries() {
        let mesh = TimeMesh::new(1.0, 4, 3).unwrap();
        assert_eq!(mesh.node_count_below(1.0).unwrap(), 12);
        assert_eq!(mesh.node_count_below(0.25).unwrap(), 6);
        assert!(mesh.node_count_below(0.3).is_err());
        assert!(mesh.node_count_below(2.0).is_err());
        assert!(mesh.node_count_below(1.0 / 16.0).is_err());
    }
}
