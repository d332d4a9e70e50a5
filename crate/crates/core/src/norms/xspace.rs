//! The space-time norm of a time series `u(., t_i)`: `sup sqrt(t)|u|` plus the
//! Carleson part `max_{r^2 < T} r^{-(2 alpha + n)} int_0^{r^2} int_B |u|^2 t^alpha`.
//!
//! Between stored times `|u|^2` is interpolated linearly and the weight `t^alpha`
//! is integrated exactly (product trapezoid rule), which handles the
//! singular weight at `t = 0` for negative `alpha`.

use serde::{Deserialize, Serialize};

use crate::boxes::BoxFamily;
use crate::error::{Error, Result};
use crate::grid::{Field, TorusGrid};

use super::{check_alpha, ArgBox, BoxMax};

/// A scalar field sampled at `t = 0` and at increasing positive times.
#[derive(Debug, Clone)]
pub struct ScalarTrace {
    grid: TorusGrid,
    initial: Field,
    times: Vec<f64>,
    states: Vec<Field>,
}

impl ScalarTrace {
    pub fn new(initial: Field, times: Vec<f64>, states: Vec<Field>) -> Result<Self> {
        let grid = *initial.grid();
        if times.len() != states.len() {
            return Err(Error::RejectedInput(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        if times.first().is_some_and(|&t| !(t > 0.0)) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::RejectedInput("times must be positive and increasing".into()));
        }
        for s in &states {
            grid.check_same(s.grid())?;
        }
        Ok(Self { grid, initial, times, states })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn initial(&self) -> &Field {
        &self.initial
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Both parts of the space-time norm, reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XNormReport {
    pub sup_part: f64,
    pub carleson_part: f64,
    pub total: f64,
    pub carleson_box: Option<ArgBox>,
}

impl XNormReport {
    pub fn zero() -> Self {
        Self { sup_part: 0.0, carleson_part: 0.0, total: 0.0, carleson_box: None }
    }
}

/// `(int_a^b t^alpha dt, int_a^b t^alpha (t - a)/(b - a) dt)`.
fn product_weights(a: f64, b: f64, alpha: f64) -> (f64, f64) {
    let p0 = (b.powf(1.0 + alpha) - a.powf(1.0 + alpha)) / (1.0 + alpha);
    let p1 = (b.powf(2.0 + alpha) - a.powf(2.0 + alpha)) / (2.0 + alpha);
    (p0, (p1 - a * p0) / (b - a))
}

/// Space-time norm of `trace` over `(0, T]`. Radii need `r^2 < T` and
/// `r^2` no later than the last stored time.
pub fn x_space_norm(trace: &ScalarTrace, alpha: f64, t_max: f64, boxes: &BoxFamily) -> Result<XNormReport> {
    check_alpha(alpha)?;
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("T must be positive, got {t_max}")));
    }
    if trace.is_empty() {
        return Err(Error::Empty("trace has no positive times".into()));
    }
    trace.grid.check_same(boxes.grid())?;
    let sup_part = trace
        .times
        .iter()
        .zip(&trace.states)
        .filter(|(&t, _)| t <= t_max)
        .map(|(&t, s)| t.sqrt() * s.max_abs())
        .fold(0.0, f64::max);

    let last = *trace.times.last().unwrap();
    let square = |f: &Field| -> Vec<f64> { f.samples().iter().map(|v| v * v).collect() };
    let mut times = vec![0.0];
    times.extend_from_slice(&trace.times);
    let mut dens = vec![square(&trace.initial)];
    dens.extend(trace.states.iter().map(square));

    let g = trace.grid;
    let n = g.dims() as f64;
    let mut acc = BoxMax::new(boxes);
    for (ri, r) in boxes.radii().iter().enumerate() {
        let h = r.radius * r.radius;
        if !(h < t_max && h <= last * (1.0 + 1e-12)) {
            continue;
        }
        let h = h.min(last);
        let mut column = vec![0.0; g.len()];
        for i in 0..times.len() - 1 {
            let (a, b) = (times[i], times[i + 1]);
            if a >= h {
                break;
            }
            let (ga, gb_full) = (&dens[i], &dens[i + 1]);
            let end = b.min(h);
            let frac = (end - a) / (b - a);
            let (p0, p1) = product_weights(a, end, alpha);
            for (k, c) in column.iter_mut().enumerate() {
                let gb = ga[k] + frac * (gb_full[k] - ga[k]);
                *c += ga[k] * (p0 - p1) + gb * p1;
            }
        }
        let scale = g.cell_volume() * r.radius.powf(-(2.0 * alpha + n));
        let sq: Vec<f64> = boxes.ball_sums(ri, &column).iter().map(|s| s * scale).collect();
        acc.push_radius(ri, &sq);
    }
    let res = acc.finish(0.0);
    Ok(XNormReport {
        sup_part,
        carleson_part: res.value,
        total: sup_part + res.value,
        carleson_box: res.arg_box,
    })
}
