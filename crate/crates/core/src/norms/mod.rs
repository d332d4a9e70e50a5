//! Norm functionals.
//!
//! Trace-side oscillation norms (Campanato, pair form, Q) live here; the
//! Carleson-box norms of extensions are in [`carleson`], pointwise suprema in
//! [`sup`] and the space-time norm of solution traces in [`xspace`].
//!
//! Every box norm is the maximum over a [`BoxFamily`] of a per-box value.
//! Spatial integrals are lattice sums with cell volume `(L/N)^n` and the ball
//! weights of [`crate::boxes`].

pub mod carleson;
pub mod sup;
pub mod xspace;

use serde::{Deserialize, Serialize};

use crate::boxes::{BoxFamily, FamilyParams};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::spectral::{forward_transform, frac_laplacian_power, inverse_transform};

pub use carleson::{
    dagger_norm, h_alpha2_norm, inverse_space_norm, scaled_h_norm, scaled_t_norm, star_norm,
    t_alpha2_norm, DaggerBox,
};
pub use sup::{besov_norm, bloch_cb_norm, bloch_hb_norm, LogTimeGrid};
pub use xspace::{x_space_norm, ScalarTrace, XNormReport};

/// Families with at most this many boxes keep their per-box table.
pub const TABLE_LIMIT: usize = 4096;

/// The box attaining a discrete supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgBox {
    /// Flat lattice index of the center.
    pub center_index: usize,
    pub center: Vec<f64>,
    pub j: u32,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxValue {
    pub center_index: usize,
    pub j: u32,
    pub value: f64,
}

/// A norm value with the box that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// `None` when no box qualified (for instance every radius too large for `T`).
    pub arg_box: Option<ArgBox>,
    /// Mean subtracted from the input before evaluation.
    pub removed_mean: f64,
    pub family: FamilyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_box: Option<Vec<BoxValue>>,
}

/// Collects squared per-box values, radius by radius, into a [`NormResult`].
pub(crate) struct BoxMax<'a> {
    boxes: &'a BoxFamily,
    squares: Vec<(usize, usize, f64)>,
}

impl<'a> BoxMax<'a> {
    pub(crate) fn new(boxes: &'a BoxFamily) -> Self {
        Self { boxes, squares: Vec::new() }
    }

    /// Records squared values for radius `ri`, one per center in family order.
    pub(crate) fn push_radius(&mut self, ri: usize, squares: &[f64]) {
        for (ci, &s) in squares.iter().enumerate() {
            self.squares.push((ri, ci, s.max(0.0)));
        }
    }

    pub(crate) fn finish(mut self, removed_mean: f64) -> NormResult {
        self.squares.sort_by_key(|&(ri, ci, _)| (ri, ci));
        let max = self.squares.iter().fold(0.0f64, |m, &(_, _, s)| m.max(s));
        let boxes = self.boxes;
        let g = boxes.grid();
        let arg_box = if self.squares.is_empty() {
            None
        } else {
            // First box within rounding of the maximum, so a global rescaling
            // never changes the reported box.
            let &(ri, ci, _) = self
                .squares
                .iter()
                .find(|&&(_, _, s)| s >= max * (1.0 - 1e-12))
                .expect("nonempty");
            let center_index = boxes.centers()[ci];
            let pos = g.position(center_index);
            let r = boxes.radii()[ri];
            Some(ArgBox {
                center_index,
                center: pos[..g.dims()].to_vec(),
                j: r.j,
                radius: r.radius,
            })
        };
        let per_box = (self.squares.len() <= TABLE_LIMIT).then(|| {
            self.squares
                .iter()
                .map(|&(ri, ci, s)| BoxValue {
                    center_index: boxes.centers()[ci],
                    j: boxes.radii()[ri].j,
                    value: s.sqrt(),
                })
                .collect()
        });
        NormResult { value: max.sqrt(), arg_box, removed_mean, family: boxes.params(), per_box }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > -1.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (-1, 1), got {alpha}")))
    }
}

pub(crate) fn check_family(f: &Field, boxes: &BoxFamily) -> Result<()> {
    f.grid().check_same(boxes.grid())
}

/// Per-box `(weighted mean, sum of w (f - mean)^2, weight sum)` for radius `ri`.
fn box_moments(values: &[f64], boxes: &BoxFamily, ri: usize) -> Vec<(f64, f64)> {
    let w_sum = boxes.weight_sum(ri);
    boxes
        .centers()
        .iter()
        .map(|&c| {
            let mut s = 0.0;
            boxes.for_each_in_ball(c, ri, |i, w| s += w * values[i]);
            let mean = s / w_sum;
            let mut dev = 0.0;
            boxes.for_each_in_ball(c, ri, |i, w| {
                let d = values[i] - mean;
                dev += w * d * d;
            });
            (mean, dev)
        })
        .collect()
}

/// Campanato norm: `max_B r^{-(n+2 alpha)} int_B |f - f_B|^2`, square-rooted.
pub fn campanato_norm(f: &Field, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    check_alpha(alpha)?;
    check_family(f, boxes)?;
    let (f0, mean) = f.without_mean();
    Ok(campanato_of_values(f0.samples(), alpha, boxes).finish(mean))
}

fn campanato_of_values<'a>(values: &[f64], alpha: f64, boxes: &'a BoxFamily) -> BoxMax<'a> {
    let g = boxes.grid();
    let n = g.dims() as f64;
    let cell = g.cell_volume();
    let mut acc = BoxMax::new(boxes);
    for (ri, r) in boxes.radii().iter().enumerate() {
        let scale = cell * r.radius.powf(-(n + 2.0 * alpha));
        let sq: Vec<f64> = box_moments(values, boxes, ri).iter().map(|&(_, d)| d * scale).collect();
        acc.push_radius(ri, &sq);
    }
    acc
}

/// Pair form: `max_B r^{-2(alpha+n)} int_B int_B |f(y) - f(z)|^2`, square-rooted.
///
/// Uses `sum_{y,z} w_y w_z (f_y - f_z)^2 = 2 W sum_y w_y (f_y - f_B)^2`.
pub fn campanato_pair_norm(f: &Field, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    check_alpha(alpha)?;
    check_family(f, boxes)?;
    let (f0, mean) = f.without_mean();
    let g = boxes.grid();
    let n = g.dims() as f64;
    let cell = g.cell_volume();
    let mut acc = BoxMax::new(boxes);
    for (ri, r) in boxes.radii().iter().enumerate() {
        let measure = cell * boxes.weight_sum(ri);
        let scale = 2.0 * measure * cell * r.radius.powf(-2.0 * (alpha + n));
        let sq: Vec<f64> =
            box_moments(f0.samples(), boxes, ri).iter().map(|&(_, d)| d * scale).collect();
        acc.push_radius(ri, &sq);
    }
    Ok(acc.finish(mean))
}

/// Q norm: `max_B r^{2 beta - n} int_B int_B |f(x) - f(y)|^2 |x - y|^{-(n + 2 beta)}`,
/// square-rooted, with minimal-image distances and the diagonal left out.
pub fn q_norm(f: &Field, beta: f64, boxes: &BoxFamily) -> Result<NormResult> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    check_family(f, boxes)?;
    let (f0, mean) = f.without_mean();
    let g = *boxes.grid();
    let dims = g.dims();
    let nn = g.n();
    let h = g.spacing();
    let p = dims as f64 + 2.0 * beta;
    // Kernel as a function of the lattice difference.
    let kernel: Vec<f64> = (0..g.len())
        .map(|i| {
            let c = g.coords(i);
            let d2: f64 = c[..dims]
                .iter()
                .map(|&a| {
                    let d = a.min(nn - a) as f64 * h;
                    d * d
                })
                .sum();
            if d2 == 0.0 {
                0.0
            } else {
                d2.powf(-p / 2.0)
            }
        })
        .collect();
    let st = g.strides();
    let vals = f0.samples();
    let cell2 = g.cell_volume() * g.cell_volume();
    let mut acc = BoxMax::new(boxes);
    for (ri, r) in boxes.radii().iter().enumerate() {
        let scale = cell2 * r.radius.powf(2.0 * beta - dims as f64);
        let sq: Vec<f64> = boxes
            .centers()
            .iter()
            .map(|&c| {
                let pts: Vec<([usize; 3], f64, f64)> = boxes
                    .ball_points(c, ri)
                    .into_iter()
                    .map(|(i, w)| (g.coords(i), w, vals[i]))
                    .collect();
                let mut s = 0.0;
                for (a, &(ca, wa, fa)) in pts.iter().enumerate() {
                    for &(cb, wb, fb) in &pts[a + 1..] {
                        let mut idx = 0;
                        for axis in 0..dims {
                            idx += ((ca[axis] + nn - cb[axis]) % nn) * st[axis];
                        }
                        let d = fa - fb;
                        s += wa * wb * d * d * kernel[idx];
                    }
                }
                2.0 * s * scale
            })
            .collect();
        acc.push_radius(ri, &sq);
    }
    Ok(acc.finish(mean))
}

/// Campanato norm of `(-Laplacian)^{-alpha/2} f`.
pub fn frac_campanato_norm(f: &Field, alpha: f64, boxes: &BoxFamily) -> Result<NormResult> {
    check_alpha(alpha)?;
    check_family(f, boxes)?;
    let (f0, mean) = f.without_mean();
    if alpha == 0.0 {
        return Ok(campanato_of_values(f0.samples(), 0.0, boxes).finish(mean));
    }
    let lifted = inverse_transform(&frac_laplacian_power(&forward_transform(&f0)?, -alpha)?);
    Ok(campanato_of_values(lifted.samples(), alpha, boxes).finish(mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::BoxSpec;
    use crate::grid::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn constants_have_zero_norm() {
        let g = TorusGrid::unit(1, 32).unwrap();
        let b = BoxFamily::new(g, BoxSpec::default()).unwrap();
        let c = Field::constant(g, 3.5);
        assert_eq!(campanato_norm(&c, 0.3, &b).unwrap().value, 0.0);
        assert_eq!(campanato_pair_norm(&c, -0.3, &b).unwrap().value, 0.0);
        assert_eq!(q_norm(&c, 0.5, &b).unwrap().value, 0.0);
        assert_eq!(campanato_norm(&c, 0.3, &b).unwrap().removed_mean, 3.5);
    }

    #[test]
    fn domain_errors() {
        let g = TorusGrid::unit(1, 16).unwrap();
        let b = BoxFamily::new(g, BoxSpec::default()).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        assert!(campanato_norm(&f, 1.0, &b).is_err());
        assert!(q_norm(&f, 0.0, &b).is_err());
        assert!(q_norm(&f, 1.0, &b).is_err());
        let other = BoxFamily::new(TorusGrid::unit(1, 32).unwrap(), BoxSpec::default()).unwrap();
        assert!(campanato_norm(&f, 0.0, &other).is_err());
    }

    #[test]
    fn value_is_max_of_table() {
        let g = TorusGrid::unit(1, 64).unwrap();
        let b = BoxFamily::new(g, BoxSpec::default()).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).sin() + x[0]).unwrap();
        let r = campanato_norm(&f, 0.25, &b).unwrap();
        let table = r.per_box.as_ref().unwrap();
        let m = table.iter().fold(0.0f64, |m, b| m.max(b.value));
        assert_eq!(m, r.value);
    }

    #[test]
    fn frac_campanato_at_zero_is_campanato() {
        let g = TorusGrid::unit(1, 64).unwrap();
        let b = BoxFamily::new(g, BoxSpec::default()).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * PI * 5.0 * x[0]).sin() + 0.3).unwrap();
        assert_eq!(
            frac_campanato_norm(&f, 0.0, &b).unwrap().value,
            campanato_norm(&f, 0.0, &b).unwrap().value
        );
    }
}
