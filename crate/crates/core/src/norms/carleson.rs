//! Carleson-box norms of semigroup extensions.
//!
//! Every norm here has the shape
//! `max_B r^{-(2 alpha + n)} int_B int_0^H g(y, t) t^gamma dt dy`
//! with `H = r` (Poisson boxes) or `H = r^2` (heat boxes) and `g` a squared
//! gradient or value density. Time integrals run over the stack's mesh
//! nodes up to `H`; the cell `(0, t_floor]` below the mesh is added as
//! `g(y, 0) t_floor^{1+gamma} / (1+gamma)`. Per-radius columns
//! `int_0^H g t^gamma dt` are accumulated node by node and then summed over
//! balls.

use serde::{Deserialize, Serialize};

use crate::boxes::BoxFamily;
use crate::error::{Error, Result};
use crate::extensions::{ExtensionStack, SemigroupKind};
use crate::fft;
use crate::grid::Field;
use crate::quadrature::TimeMesh;
use crate::spectral::forward_transform;

use super::{check_alpha, check_family, BoxMax, NormResult};

/// Box height convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DaggerBox {
    /// `B(x0, r) x (0, r)`
    Linear,
    /// `B(x0, r) x (0, r^2)`
    Parabolic,
}

impl DaggerBox {
    fn height(self, r: f64) -> f64 {
        match self {
            DaggerBox::Linear => r,
            DaggerBox::Parabolic => r * r,
        }
    }
}

/// Box-norm accumulator over a stream of node densities.
pub(crate) struct CarlesonPlan<'a> {
    pub boxes: &'a BoxFamily,
    pub mesh: &'a TimeMesh,
    pub alpha: f64,
    pub gamma: f64,
    pub height: DaggerBox,
    /// Only radii with `keep(r)` enter the maximum.
    pub keep: &'a dyn Fn(f64) -> bool,
}

impl CarlesonPlan<'_> {
    /// `density(q)` is called once for each needed node, in ascending order;
    /// `base` is the density at `t = 0`.
    pub fn run(
        &self,
        base: &[f64],
        mut density: impl FnMut(usize) -> Vec<f64>,
        removed_mean: f64,
    ) -> Result<NormResult> {
        if !(self.gamma > -1.0) {
            return Err(Error::Domain(format!("time weight exponent {} <= -1", self.gamma)));
        }
        let g = self.boxes.grid();
        let n = g.dims() as f64;
        let mut targets: Vec<(usize, usize)> = Vec::new();
        for (ri, r) in self.boxes.radii().iter().enumerate() {
            if (self.keep)(r.radius) {
                let count = self.mesh.node_count_below(self.height.height(r.radius))?;
                targets.push((count, ri));
            }
        }
        targets.sort();
        let tf = self.mesh.t_floor();
        let floor = tf.powf(1.0 + self.gamma) / (1.0 + self.gamma);
        let mut column: Vec<f64> = base.iter().map(|v| v * floor).collect();
        let mut acc = BoxMax::new(self.boxes);
        let mut q = 0;
        let nodes = self.mesh.nodes();
        let weights = self.mesh.weights();
        for &(count, ri) in &targets {
            while q < count {
                let d = density(q);
                let w = weights[q] * nodes[q].powf(self.gamma);
                for (c, v) in column.iter_mut().zip(&d) {
                    *c += w * v;
                }
                q += 1;
            }
            let r = self.boxes.radii()[ri].radius;
            let scale = g.cell_volume() * r.powf(-(2.0 * self.alpha + n));
            let sums = self.boxes.ball_sums(ri, &column);
            let sq: Vec<f64> = sums.iter().map(|s| s * scale).collect();
            acc.push_radius(ri, &sq);
        }
        Ok(acc.finish(removed_mean))
    }
}

fn stack_norm(
    stack: &ExtensionStack,
    alpha: f64,
    boxes: &BoxFamily,
    gamma: f64,
    height: DaggerBox,
    with_time: bool,
) -> Result<NormResult> {
    check_alpha(alpha)?;
    stack.grid().check_same(boxes.grid())?;
    let plan = CarlesonPlan { boxes, mesh: stack.mesh(), alpha, gamma, height, keep: &|_| true };
    plan.run(
        &stack.base().gradient_density(with_time),
        |q| stack.node(q).gradient_density(with_time),
        stack.removed_mean(),
    )
}

fn require(stack: &ExtensionStack, kind: SemigroupKind) -> Result<()> {
    if stack.kind() != kind {
        return Err(Error::Precondition(format!("expected a {} stack", kind.name())));
    }
    Ok(())
}

/// `max_B r^{-(2 alpha + n)} int_B int_0^r |grad_{x,t} u|^2 t dt dy` for a Poisson stack.
pub fn h_alpha2_norm(stack: &ExtensionStack, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    require(stack, SemigroupKind::Poisson)?;
    stack_norm(stack, alpha, boxes, 1.0, DaggerBox::Linear, true)
}

/// Scale-invariant variant with time weight `t^{1 + 2 alpha}`.
pub fn scaled_h_norm(stack: &ExtensionStack, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    require(stack, SemigroupKind::Poisson)?;
    check_alpha(alpha)?;
    stack_norm(stack, alpha, boxes, 1.0 + 2.0 * alpha, DaggerBox::Linear, true)
}

/// [`h_alpha2_norm`] of the extension of `(-Laplacian)^{-alpha/2} f`.
pub fn star_norm(stack: &ExtensionStack, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    require(stack, SemigroupKind::Poisson)?;
    let lifted = stack.spectral_lift(alpha)?;
    h_alpha2_norm(&lifted, alpha, boxes)
}

/// `max_B r^{-(2 alpha + n)} int_B int_0^{r^2} |grad_x u|^2 dt dy` for a heat stack.
pub fn t_alpha2_norm(stack: &ExtensionStack, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    require(stack, SemigroupKind::Heat)?;
    stack_norm(stack, alpha, boxes, 0.0, DaggerBox::Parabolic, false)
}

/// Scale-invariant heat variant with time weight `t^alpha`.
pub fn scaled_t_norm(stack: &ExtensionStack, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    require(stack, SemigroupKind::Heat)?;
    check_alpha(alpha)?;
    stack_norm(stack, alpha, boxes, alpha, DaggerBox::Parabolic, false)
}

/// `max_B r^{-(2 alpha + n)} int_B int_0^H |grad_{x,t} v|^2 t dt dy` with
/// `v` the heat extension of `(-Laplacian)^{-alpha/2} f` and `H = r` or `r^2`.
///
/// The linear variant needs a mesh reaching `L/2`; the stack is remeshed when
/// its own mesh is shorter.
pub fn dagger_norm(
    stack: &ExtensionStack,
    alpha: f64,
    boxes: &BoxFamily,
    variant: DaggerBox,
) -> Result<NormResult> {
    require(stack, SemigroupKind::Heat)?;
    let lifted = stack.spectral_lift(alpha)?;
    let top = boxes.radii().first().map(|r| variant.height(r.radius)).unwrap_or(0.0);
    let lifted = if lifted.mesh().r_max() < top {
        let m = stack.mesh();
        lifted.remeshed(&TimeMesh::new(top, m.panels(), m.nodes_per_panel())?)?
    } else {
        lifted
    };
    stack_norm(&lifted, alpha, boxes, 1.0, variant, true)
}

/// `max_{r^2 < T} r^{-(2 alpha + n)} int_0^{r^2} int_B |e^{t Laplacian} f|^2 t^alpha dy dt`,
/// square-rooted. `T` may be infinite.
///
/// Heat-flow values are produced node by node, so memory stays at a few fields
/// even on three-dimensional grids.
pub fn inverse_space_norm(f: &Field, alpha: f64, t_max: f64, boxes: &BoxFamily) -> Result<NormResult> {
    check_alpha(alpha)?;
    check_family(f, boxes)?;
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("T must be positive, got {t_max}")));
    }
    let (f0, mean) = f.without_mean();
    let trace = forward_transform(&f0)?;
    let g = *f.grid();
    let top = g.period() * g.period() / 4.0;
    let mesh = TimeMesh::with_defaults(top)?;
    inverse_space_norm_on(&trace, alpha, t_max, boxes, &mesh, mean)
}

pub(crate) fn inverse_space_norm_on(
    trace: &crate::grid::SpectralField,
    alpha: f64,
    t_max: f64,
    boxes: &BoxFamily,
    mesh: &TimeMesh,
    removed_mean: f64,
) -> Result<NormResult> {
    let g = *trace.grid();
    let base: Vec<f64> = {
        let mut data = trace.coefficients().to_vec();
        fft::inverse(&mut data, g.dims(), g.n());
        data.iter().map(|c| c.re * c.re).collect()
    };
    let keep = |r: f64| r * r < t_max;
    let plan = CarlesonPlan {
        boxes,
        mesh,
        alpha,
        gamma: alpha,
        height: DaggerBox::Parabolic,
        keep: &keep,
    };
    let nodes = mesh.nodes();
    plan.run(
        &base,
        |q| {
            let mut data: Vec<_> = trace
                .coefficients()
                .iter()
                .enumerate()
                .map(|(i, c)| c * (-SemigroupKind::Heat.rate(&g, g.wavevector(i)) * nodes[q]).exp())
                .collect();
            fft::inverse(&mut data, g.dims(), g.n());
            data.iter().map(|c| c.re * c.re).collect()
        },
        removed_mean,
    )
}
