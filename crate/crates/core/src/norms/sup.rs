//! Pointwise suprema over the extension half space: Bloch and Besov norms.
//!
//! The maximum over lattice points and time nodes is refined by a golden
//! section search in `t` at the maximizing point, between the neighbouring nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::{ExtensionStack, SemigroupKind};
use crate::grid::Field;
use crate::quadrature::TimeMesh;

const GOLDEN_STEPS: usize = 90;

/// Maximizes a unimodal `h` on `[a, b]`.
pub(crate) fn golden_max(a: f64, b: f64, h: impl Fn(f64) -> f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = h(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = h(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `sup t^power |grad u|` over the stack, refined in `t`.
fn refined_gradient_sup(stack: &ExtensionStack, power: f64, with_time: bool) -> f64 {
    let mut best = (0.0f64, 0usize, 0usize);
    for (q, node) in stack.nodes().iter().enumerate() {
        let dens = node.gradient_density(with_time);
        let (i, m) = dens
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let v = node.t.powf(power) * m.sqrt();
        if v > best.0 {
            best = (v, q, i);
        }
    }
    let (v, q, point) = best;
    if v == 0.0 {
        return 0.0;
    }
    let nodes = stack.mesh().nodes();
    let a = if q == 0 { stack.mesh().t_floor() } else { nodes[q - 1] };
    let b = nodes[(q + 1).min(nodes.len() - 1)];
    let (_, refined) = golden_max(a, b, |t| {
        t.powf(power) * stack.evaluate_point(point, t).gradient_norm(with_time)
    });
    v.max(refined)
}

/// `sup t |grad_{x,t} u|` for a Poisson stack.
pub fn bloch_hb_norm(stack: &ExtensionStack) -> Result<f64> {
    if stack.kind() != SemigroupKind::Poisson {
        return Err(Error::Precondition("expected a poisson stack".into()));
    }
    Ok(refined_gradient_sup(stack, 1.0, true))
}

/// `sup sqrt(t) |grad_x u|` for a heat stack.
pub fn bloch_cb_norm(stack: &ExtensionStack) -> Result<f64> {
    if stack.kind() != SemigroupKind::Heat {
        return Err(Error::Precondition("expected a heat stack".into()));
    }
    Ok(refined_gradient_sup(stack, 0.5, false))
}

/// Log-uniform times `t_min .. t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogTimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl LogTimeGrid {
    /// `[1e-8 L^2, L^2]` with 241 points.
    pub fn for_period(period: f64) -> Self {
        let l2 = period * period;
        Self { t_min: 1e-8 * l2, t_max: l2, count: 241 }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.count >= 2) {
            return Err(Error::Domain(format!("invalid time grid {self:?}")));
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let step = (b - a) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| (a + step * i as f64).exp()).collect())
    }
}

/// `sup sqrt(t) |e^{t Laplacian} f|` over the lattice and `t_grid`, refined in `t`.
/// The mean of `f` is removed first.
pub fn besov_norm(f: &Field, t_grid: &LogTimeGrid) -> Result<f64> {
    let times = t_grid.times()?;
    // A one-node mesh only serves to hold the trace.
    let mesh = TimeMesh::new(t_grid.t_max, 1, 1)?;
    let stack = ExtensionStack::build(f, SemigroupKind::Heat, &mesh)?;
    let trace = stack.trace();
    let g = *f.grid();
    let mut best = (0.0f64, 0usize, 0usize);
    for (q, &t) in times.iter().enumerate() {
        let vals = crate::spectral::inverse_transform(
            &trace.map_real(|k| (-SemigroupKind::Heat.rate(&g, k) * t).exp()),
        );
        let (i, m) = vals
            .samples()
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, &v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        let v = t.sqrt() * m;
        if v > best.0 {
            best = (v, q, i);
        }
    }
    let (v, q, point) = best;
    if v == 0.0 {
        return Ok(0.0);
    }
    let a = times[q.saturating_sub(1)];
    let b = times[(q + 1).min(times.len() - 1)];
    let (_, refined) = golden_max(a, b, |t| t.sqrt() * stack.evaluate_point(point, t).value.abs());
    Ok(v.max(refined))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_max(0.0, 3.0, |x| -(x - 1.3f64).powi(2) + 2.0);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = LogTimeGrid { t_min: 1e-4, t_max: 1.0, count: 5 };
        let t = g.times().unwrap();
        assert!((t[0] - 1e-4).abs() < 1e-18);
        assert!((t[2] - 1e-2).abs() < 1e-15);
        assert!((t[4] - 1.0).abs() < 1e-15);
        assert!(LogTimeGrid { t_min: 1.0, t_max: 0.5, count: 5 }.times().is_err());
    }
}
