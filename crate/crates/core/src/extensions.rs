//! Semigroup extensions `u(x, t)` of a trace `f`, sampled at the nodes of a
//! [`TimeMesh`] together with their full space-time gradients.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Field, SpectralField, TorusGrid};
use crate::quadrature::{gauss_legendre_on, TimeMesh};
use crate::spectral::{forward_transform, odd_wavevector, power_symbol, wavenumber};

pub use crate::spectral::SemigroupKind;

/// Operator applied to the trace before extending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lift", rename_all = "snake_case")]
pub enum Lift {
    None,
    /// `(-Laplacian)^{-alpha/2}` by its Fourier symbol.
    Spectral { alpha: f64 },
    /// `(-Laplacian)^{-alpha/2}` by truncated subordination in the extension variable.
    Subordination { alpha: f64, s_cut: f64, tail_bound: f64 },
}

/// Values and gradients of one extension at a single time.
#[derive(Debug, Clone)]
pub struct NodeData {
    pub t: f64,
    pub values: Vec<f64>,
    pub grad_x: Vec<Vec<f64>>,
    pub grad_t: Vec<f64>,
}

impl NodeData {
    /// `|grad_x u|^2`, plus `(d_t u)^2` when `with_time` is set.
    pub fn gradient_density(&self, with_time: bool) -> Vec<f64> {
        let mut d = vec![0.0; self.values.len()];
        for g in &self.grad_x {
            for (o, v) in d.iter_mut().zip(g) {
                *o += v * v;
            }
        }
        if with_time {
            for (o, v) in d.iter_mut().zip(&self.grad_t) {
                *o += v * v;
            }
        }
        d
    }
}

/// Extension of a mean-zero trace on every node of a time mesh, plus `t = 0`.
#[derive(Debug, Clone)]
pub struct ExtensionStack {
    grid: TorusGrid,
    kind: SemigroupKind,
    mesh: TimeMesh,
    trace: SpectralField,
    removed_mean: f64,
    lift: Lift,
    base: NodeData,
    nodes: Vec<NodeData>,
}

impl ExtensionStack {
    /// Extends `f` after removing its mean.
    pub fn build(f: &Field, kind: SemigroupKind, mesh: &TimeMesh) -> Result<Self> {
        let (f0, mean) = f.without_mean();
        let mut trace = forward_transform(&f0)?;
        let mut c = trace.coefficients().to_vec();
        c[0] = Complex64::new(0.0, 0.0);
        trace = SpectralField::new(*f.grid(), c)?;
        Self::from_trace(trace, kind, mesh, mean, Lift::None)
    }

    fn from_trace(
        trace: SpectralField,
        kind: SemigroupKind,
        mesh: &TimeMesh,
        removed_mean: f64,
        lift: Lift,
    ) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::Empty("time mesh has no nodes".into()));
        }
        let grid = *trace.grid();
        let base = node_data(&trace, kind, 0.0);
        let nodes = mesh.nodes().par_iter().map(|&t| node_data(&trace, kind, t)).collect();
        Ok(Self { grid, kind, mesh: mesh.clone(), trace, removed_mean, lift, base, nodes })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn kind(&self) -> SemigroupKind {
        self.kind
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    /// Coefficients of `u(., 0)`, after any lift.
    pub fn trace(&self) -> &SpectralField {
        &self.trace
    }

    pub fn removed_mean(&self) -> f64 {
        self.removed_mean
    }

    pub fn lift(&self) -> Lift {
        self.lift
    }

    /// Data at `t = 0`.
    pub fn base(&self) -> &NodeData {
        &self.base
    }

    pub fn nodes(&self) -> &[NodeData] {
        &self.nodes
    }

    pub fn node(&self, q: usize) -> &NodeData {
        &self.nodes[q]
    }

    pub fn values_field(&self, q: usize) -> Field {
        Field::new(self.grid, self.nodes[q].values.clone()).expect("finite node values")
    }

    /// The same trace on a different mesh.
    pub fn remeshed(&self, mesh: &TimeMesh) -> Result<Self> {
        Self::from_trace(self.trace.clone(), self.kind, mesh, self.removed_mean, self.lift)
    }

    /// Extension of `(-Laplacian)^{-alpha/2} f` by its symbol, `alpha` in `(-1, 1)`.
    pub fn spectral_lift(&self, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (-1, 1), got {alpha}")));
        }
        self.check_unlifted()?;
        let g = self.grid;
        let trace = self.trace.map_real(|k| power_symbol(&g, k, -alpha));
        Self::from_trace(trace, self.kind, &self.mesh, self.removed_mean, Lift::Spectral { alpha })
    }

    fn check_unlifted(&self) -> Result<()> {
        if self.lift != Lift::None {
            return Err(Error::Precondition("stack is already lifted".into()));
        }
        Ok(())
    }

    /// Largest `|Laplacian_x u + d_t^2 u|` (Poisson) or `|Laplacian_x u - d_t u|`
    /// (heat) over the nodes, relative to the largest `|u|`.
    pub fn pde_residual(&self) -> f64 {
        let g = self.grid;
        let c = 2.0 * PI / g.period();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for node in &self.nodes {
            let t = node.t;
            let kind = self.kind;
            let r = self.trace.map_real(|k| {
                let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                let lap = -c * c * k2;
                let lam = kind.rate(&g, k);
                let decay = (-lam * t).exp();
                match kind {
                    SemigroupKind::Poisson => (lap + lam * lam) * decay,
                    SemigroupKind::Heat => (lap + lam) * decay,
                }
            });
            let res = crate::spectral::inverse_transform(&r);
            worst = worst.max(res.max_abs());
            scale = scale.max(node.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Writes one field file per node plus a JSON manifest.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for q in 0..self.nodes.len() {
            let name = format!("node_{q:04}.tlab");
            crate::io::save_field(&self.values_field(q), dir.join(&name))?;
            files.push(name);
        }
        let manifest = StackManifest {
            kind: self.kind,
            grid: self.grid,
            lift: self.lift,
            removed_mean: self.removed_mean,
            nodes: self.mesh.nodes().to_vec(),
            weights: self.mesh.weights().to_vec(),
            files,
        };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    /// Value and space-time gradient at one lattice point and arbitrary `t >= 0`,
    /// by direct summation over modes.
    pub fn evaluate_point(&self, point: usize, t: f64) -> PointValue {
        let g = self.grid;
        let x = g.position(point);
        let c = 2.0 * PI / g.period();
        let mut out = PointValue { value: 0.0, grad_x: [0.0; 3], grad_t: 0.0 };
        for (i, a) in self.trace.coefficients().iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            let k = g.wavevector(i);
            let kk = odd_wavevector(&g, k);
            let phase = c * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
            let lam = self.kind.rate(&g, k);
            let v = a * Complex64::from_polar((-lam * t).exp(), phase);
            out.value += v.re;
            out.grad_t += -lam * v.re;
            for axis in 0..g.dims() {
                // d/dx of Re(v) with symbol i c k
                out.grad_x[axis] += -c * kk[axis] as f64 * v.im;
            }
        }
        out
    }
}

#[derive(Serialize)]
struct StackManifest {
    kind: SemigroupKind,
    grid: TorusGrid,
    lift: Lift,
    removed_mean: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    files: Vec<String>,
}

/// Pointwise extension data from [`ExtensionStack::evaluate_point`].
#[derive(Debug, Clone, Copy)]
pub struct PointValue {
    pub value: f64,
    pub grad_x: [f64; 3],
    pub grad_t: f64,
}

impl PointValue {
    pub fn gradient_norm(&self, with_time: bool) -> f64 {
        let mut s: f64 = self.grad_x.iter().map(|v| v * v).sum();
        if with_time {
            s += self.grad_t * self.grad_t;
        }
        s.sqrt()
    }
}

pub(crate) fn node_data(trace: &SpectralField, kind: SemigroupKind, t: f64) -> NodeData {
    let g = *trace.grid();
    let c = 2.0 * PI / g.period();
    let dims = g.dims();
    let mut v = Vec::with_capacity(g.len());
    let mut dt = Vec::with_capacity(g.len());
    let mut dx: Vec<Vec<Complex64>> = vec![Vec::with_capacity(g.len()); dims];
    for (i, a) in trace.coefficients().iter().enumerate() {
        let k = g.wavevector(i);
        let lam = kind.rate(&g, k);
        let u = a * (-lam * t).exp();
        v.push(u);
        dt.push(-lam * u);
        let kk = odd_wavevector(&g, k);
        for (axis, d) in dx.iter_mut().enumerate() {
            d.push(Complex64::new(0.0, c * kk[axis] as f64) * u);
        }
    }
    let synth = |mut data: Vec<Complex64>| -> Vec<f64> {
        fft::inverse(&mut data, dims, g.n());
        data.into_iter().map(|z| z.re).collect()
    };
    NodeData {
        t,
        values: synth(v),
        grad_x: dx.into_iter().map(synth).collect(),
        grad_t: synth(dt),
    }
}

/// Panels and nodes of the subordination integral in `s`.
const SUBORDINATION_PANELS: usize = 48;
const SUBORDINATION_NODES: usize = 16;

/// `Gamma(alpha)^{-1} int_0^{s_cut} e^{-lam s} s^{alpha-1} ds` by dyadic
/// Gauss-Legendre panels; the innermost panel uses `sigma = s^alpha`, which
/// removes the endpoint singularity.
pub fn subordination_symbol(lam: f64, alpha: f64, s_cut: f64) -> f64 {
    let mut total = 0.0;
    let inner = s_cut * 0.5f64.powi(SUBORDINATION_PANELS as i32);
    let (sig, w) = gauss_legendre_on(SUBORDINATION_NODES, 0.0, inner.powf(alpha));
    for (s, w) in sig.iter().zip(&w) {
        total += w * (-lam * s.powf(1.0 / alpha)).exp() / alpha;
    }
    for m in 0..SUBORDINATION_PANELS {
        let a = s_cut * 0.5f64.powi(m as i32 + 1);
        let b = 2.0 * a;
        let (s, w) = gauss_legendre_on(SUBORDINATION_NODES, a, b);
        for (s, w) in s.iter().zip(&w) {
            total += w * (-lam * s).exp() * s.powf(alpha - 1.0);
        }
    }
    total / libm::tgamma(alpha)
}

/// Lifts a Poisson stack by `(-Laplacian)^{-alpha/2}` through the subordination
/// integral `Gamma(alpha)^{-1} int_0^{s_cut} u(x, t + s) s^{alpha-1} ds`.
///
/// The reported tail bound dominates the sup-norm of the dropped part
/// `int_{s_cut}^inf` at every `t >= 0`.
pub fn frac_lift_subordination(stack: &ExtensionStack, alpha: f64, s_cut: f64) -> Result<ExtensionStack> {
    if stack.kind != SemigroupKind::Poisson {
        return Err(Error::Precondition("subordination lift needs a Poisson stack".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(s_cut.is_finite() && s_cut > 0.0) {
        return Err(Error::Domain(format!("s_cut must be positive, got {s_cut}")));
    }
    stack.check_unlifted()?;
    let g = stack.grid;
    let trace = stack.trace.map_real(|k| {
        if k == [0, 0, 0] {
            0.0
        } else {
            subordination_symbol(wavenumber(&g, k), alpha, s_cut)
        }
    });
    let l1: f64 = stack.trace.coefficients().iter().map(|c| c.norm()).sum();
    let lam1 = 2.0 * PI / g.period();
    let tail_bound =
        l1 * s_cut.powf(alpha - 1.0) * (-lam1 * s_cut).exp() / (lam1 * libm::tgamma(alpha));
    ExtensionStack::from_trace(
        trace,
        SemigroupKind::Poisson,
        &stack.mesh,
        stack.removed_mean,
        Lift::Subordination { alpha, s_cut, tail_bound },
    )
}

/// `sup_{nodes, x} t^{1-alpha} |grad_{x,t} u|` without normalization.
pub fn gradient_bound(stack: &ExtensionStack, alpha: f64) -> f64 {
    stack
        .nodes
        .iter()
        .map(|n| {
            let m = n.gradient_density(true).into_iter().fold(0.0f64, f64::max);
            n.t.powf(1.0 - alpha) * m.sqrt()
        })
        .fold(0.0, f64::max)
}

/// Empirical constant `sup t^{1-alpha} |grad_{x,t} u| / h_norm`.
pub fn gradient_bound_ratio(stack: &ExtensionStack, alpha: f64, h_norm: f64) -> Result<f64> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (-1, 1), got {alpha}")));
    }
    if !(h_norm > 0.0 && h_norm.is_finite()) {
        return Err(Error::UndefinedRatio(format!("norm must be positive, got {h_norm}")));
    }
    Ok(gradient_bound(stack, alpha) / h_norm)
}

/// Outcome of [`modulus_bound_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusReport {
    pub alpha: f64,
    /// `G = sup t^{1-alpha} |grad_{x,t} u|` over the nodes.
    pub gradient_bound: f64,
    /// Largest `|u(x,t) - u(x0,t)| / (G t^{alpha-1} |x - x0|)` with `|x - x0| <= t`.
    pub max_ratio_near: f64,
    /// Largest ratio against the far-field bound, `|x - x0| > t`.
    pub max_ratio_far: f64,
    pub max_ratio: f64,
    pub pairs_checked: usize,
    /// Largest `|u(x0,t) - u(x0,t)|`, which must be exactly zero.
    pub coincident_difference: f64,
}

/// Checks `|u(x,t) - u(x0,t)|` against the three-regime modulus bound scaled by
/// the gradient constant `G`:
/// `t^{alpha-1}|x-x0|` when `|x-x0| <= t`, otherwise `|x-x0|^alpha` for
/// `alpha > 0`, `t^alpha` for `alpha < 0` and `1 + log(|x-x0|/t)` for `alpha = 0`.
pub fn modulus_bound_check(stack: &ExtensionStack, alpha: f64) -> Result<ModulusReport> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (-1, 1), got {alpha}")));
    }
    let g = stack.grid;
    let gb = gradient_bound(stack, alpha);
    let center_stride = (g.n() / 8).max(1);
    let node_stride = (stack.mesh.nodes_per_panel() / 2).max(1);
    let centers: Vec<usize> = (0..g.len())
        .filter(|&i| g.coords(i)[..g.dims()].iter().all(|c| c % center_stride == 0))
        .collect();
    let h = g.spacing();
    let n = g.n() as i64;
    let mut report = ModulusReport {
        alpha,
        gradient_bound: gb,
        max_ratio_near: 0.0,
        max_ratio_far: 0.0,
        max_ratio: 0.0,
        pairs_checked: 0,
        coincident_difference: 0.0,
    };
    if gb == 0.0 {
        return Ok(report);
    }
    for node in stack.nodes.iter().step_by(node_stride) {
        let t = node.t;
        for &c0 in &centers {
            let cc = g.coords(c0);
            let u0 = node.values[c0];
            for (i, &u) in node.values.iter().enumerate() {
                let ci = g.coords(i);
                let mut d2 = 0.0;
                for axis in 0..g.dims() {
                    let d = (ci[axis] as i64 - cc[axis] as i64).rem_euclid(n);
                    let d = d.min(n - d) as f64 * h;
                    d2 += d * d;
                }
                let diff = (u - u0).abs();
                if d2 == 0.0 {
                    report.coincident_difference = report.coincident_difference.max(diff);
                    continue;
                }
                let d = d2.sqrt();
                report.pairs_checked += 1;
                if d <= t {
                    let r = diff / (gb * t.powf(alpha - 1.0) * d);
                    report.max_ratio_near = report.max_ratio_near.max(r);
                } else {
                    let bound = if alpha > 0.0 {
                        d.powf(alpha)
                    } else if alpha < 0.0 {
                        t.powf(alpha)
                    } else {
                        1.0 + (d / t).ln()
                    };
                    report.max_ratio_far = report.max_ratio_far.max(diff / (gb * bound));
                }
            }
        }
    }
    report.max_ratio = report.max_ratio_near.max(report.max_ratio_far);
    Ok(report)
}
