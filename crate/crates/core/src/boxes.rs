//! Discrete periodic balls and the box families norms are maximized over.
//!
//! A ball of radius `m` cells contains the lattice offsets `o` with `|o| < m`
//! at full weight and those with `|o| = m` at half weight, the average of the
//! open and closed ball. Offsets that coincide modulo `N` are merged, so a
//! ball of radius `N/2` weights its antipodal point once.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::TorusGrid;

/// User-facing box parameters: dyadic levels `j_min..=j_max` (radius
/// `L 2^{-j}`) and the center stride in lattice cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub j_min: u32,
    #[serde(default)]
    pub j_max: Option<u32>,
    #[serde(default)]
    pub stride: Option<usize>,
}

impl Default for BoxSpec {
    fn default() -> Self {
        Self { j_min: 1, j_max: None, stride: None }
    }
}

impl BoxSpec {
    /// Every lattice point as a center, every radius from `L/2` down to one cell.
    pub fn full() -> Self {
        Self { j_min: 1, j_max: Some(u32::MAX), stride: Some(1) }
    }

    /// Parses `jmin:jmax:stride`; empty fields keep their defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::RejectedInput(format!("expected jmin:jmax:stride, got {s:?}")));
        }
        let bad = |p: &str| Error::RejectedInput(format!("bad box field {p:?} in {s:?}"));
        let mut spec = BoxSpec::default();
        if !parts[0].is_empty() {
            spec.j_min = parts[0].parse().map_err(|_| bad(parts[0]))?;
        }
        if !parts[1].is_empty() {
            spec.j_max = Some(parts[1].parse().map_err(|_| bad(parts[1]))?);
        }
        if !parts[2].is_empty() {
            spec.stride = Some(parts[2].parse().map_err(|_| bad(parts[2]))?);
        }
        Ok(spec)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = Some(stride);
        self
    }
}

/// One dyadic radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallRadius {
    pub j: u32,
    /// Radius in lattice cells, `N 2^{-j}`.
    pub cells: usize,
    /// Physical radius `L 2^{-j}`.
    pub radius: f64,
}

/// Resolved family parameters, echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub j_min: u32,
    pub j_max: u32,
    pub stride: usize,
}

#[derive(Debug, Clone)]
struct Ball {
    offsets: Vec<[usize; 3]>,
    weights: Vec<f64>,
    weight_sum: f64,
    kernel_hat: Vec<Complex64>,
}

/// Centers on a sub-lattice of stride `s` and a list of dyadic radii.
#[derive(Debug, Clone)]
pub struct BoxFamily {
    grid: TorusGrid,
    params: FamilyParams,
    centers: Vec<usize>,
    radii: Vec<BallRadius>,
    balls: Vec<Ball>,
}

impl BoxFamily {
    pub fn new(grid: TorusGrid, spec: BoxSpec) -> Result<Self> {
        let levels = grid.levels();
        let n = grid.n();
        let j_max = spec.j_max.unwrap_or(levels.saturating_sub(1)).min(levels);
        let j_min = spec.j_min;
        if j_min < 1 {
            return Err(Error::Domain("largest radius must not exceed L/2 (j_min >= 1)".into()));
        }
        if j_min > j_max {
            return Err(Error::Domain(format!("empty radius range j = {j_min}..={j_max}")));
        }
        let stride = spec.stride.unwrap_or((n / 32).max(1));
        if stride == 0 || n % stride != 0 {
            return Err(Error::Domain(format!("stride {stride} must divide N = {n}")));
        }
        let m_max = n >> j_min;
        let worst_gap = stride as f64 * (grid.dims() as f64).sqrt() / 2.0;
        if worst_gap > m_max as f64 {
            return Err(Error::Domain(format!(
                "stride {stride} leaves grid points outside every ball of radius {m_max} cells"
            )));
        }
        let dims = grid.dims();
        let centers = (0..grid.len())
            .filter(|&i| grid.coords(i)[..dims].iter().all(|c| c % stride == 0))
            .collect();
        let radii: Vec<BallRadius> = (j_min..=j_max)
            .map(|j| BallRadius {
                j,
                cells: n >> j,
                radius: grid.period() * 0.5f64.powi(j as i32),
            })
            .collect();
        let balls = radii.iter().map(|r| build_ball(&grid, r.cells)).collect();
        Ok(Self { grid, params: FamilyParams { j_min, j_max, stride }, centers, radii, balls })
    }

    pub fn full(grid: TorusGrid) -> Result<Self> {
        Self::new(grid, BoxSpec::full())
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    /// Flat lattice indices of the centers.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    /// Radii, largest first.
    pub fn radii(&self) -> &[BallRadius] {
        &self.radii
    }

    /// Sum of the lattice weights of ball `ri`; the ball measure is this times the cell volume.
    pub fn weight_sum(&self, ri: usize) -> f64 {
        self.balls[ri].weight_sum
    }

    /// Calls `visit(point, weight)` for every lattice point of the ball of
    /// radius index `ri` around `center`.
    pub fn for_each_in_ball(&self, center: usize, ri: usize, mut visit: impl FnMut(usize, f64)) {
        let g = &self.grid;
        let n = g.n();
        let c = g.coords(center);
        let st = g.strides();
        let ball = &self.balls[ri];
        for (o, &w) in ball.offsets.iter().zip(&ball.weights) {
            let idx = ((c[0] + o[0]) % n) * st[0]
                + ((c[1] + o[1]) % n) * st[1]
                + ((c[2] + o[2]) % n) * st[2];
            visit(idx, w);
        }
    }

    /// Lattice points of a ball with their weights.
    pub fn ball_points(&self, center: usize, ri: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.balls[ri].offsets.len());
        self.for_each_in_ball(center, ri, |i, w| out.push((i, w)));
        out
    }

    /// Weighted sums `sum_{y in B(c, r)} w(y) density(y)` for every center `c`.
    pub fn ball_sums(&self, ri: usize, density: &[f64]) -> Vec<f64> {
        let len = self.grid.len();
        let ball = &self.balls[ri];
        let direct = self.centers.len() * ball.offsets.len();
        let spectral = 6 * len * (len.trailing_zeros() as usize + 1);
        if direct <= spectral {
            self.centers
                .iter()
                .map(|&c| {
                    let mut s = 0.0;
                    self.for_each_in_ball(c, ri, |i, w| s += w * density[i]);
                    s
                })
                .collect()
        } else {
            let full = self.correlate(ri, density);
            self.centers.iter().map(|&c| full[c]).collect()
        }
    }

    /// Ball sums at every lattice point by circular correlation with the ball kernel.
    fn correlate(&self, ri: usize, density: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let len = g.len();
        let mut data: Vec<Complex64> = density.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut data, g.dims(), g.n());
        for (d, k) in data.iter_mut().zip(&self.balls[ri].kernel_hat) {
            *d *= k.conj() * len as f64;
        }
        fft::inverse(&mut data, g.dims(), g.n());
        data.into_iter().map(|c| c.re).collect()
    }
}

fn build_ball(grid: &TorusGrid, m: usize) -> Ball {
    let dims = grid.dims();
    let n = grid.n() as i64;
    let mi = m as i64;
    let range = |axis: usize| if axis < dims { -mi..=mi } else { 0..=0 };
    let mut merged: BTreeMap<[usize; 3], f64> = BTreeMap::new();
    for a in range(0) {
        for b in range(1) {
            for c in range(2) {
                let d2 = a * a + b * b + c * c;
                let w = match d2.cmp(&(mi * mi)) {
                    std::cmp::Ordering::Less => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Greater => continue,
                };
                let key = [a.rem_euclid(n) as usize, b.rem_euclid(n) as usize, c.rem_euclid(n) as usize];
                *merged.entry(key).or_insert(0.0) += w;
            }
        }
    }
    let offsets: Vec<[usize; 3]> = merged.keys().copied().collect();
    let weights: Vec<f64> = merged.values().copied().collect();
    let weight_sum = weights.iter().sum();
    let st = grid.strides();
    let mut kernel: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (o, w) in offsets.iter().zip(&weights) {
        kernel[o[0] * st[0] + o[1] * st[1] + o[2] * st[2]] += w;
    }
    fft::forward(&mut kernel, dims, grid.n());
    Ball { offsets, weights, weight_sum, kernel_hat: kernel }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_family_parameters() {
        let g = TorusGrid::unit(1, 256).unwrap();
        let b = BoxFamily::new(g, BoxSpec::default()).unwrap();
        assert_eq!(b.params(), FamilyParams { j_min: 1, j_max: 7, stride: 8 });
        assert_eq!(b.centers().len(), 32);
        assert_eq!(b.radii()[0].cells, 128);
        assert_eq!(b.radii().last().unwrap().cells, 2);
    }

    #[test]
    fn one_dimensional_ball_weights() {
        let g = TorusGrid::unit(1, 16).unwrap();
        let b = BoxFamily::full(g).unwrap();
        // radius 2 cells: offsets -1..1 full weight, +-2 half weight
        let ri = b.radii().iter().position(|r| r.cells == 2).unwrap();
        assert_eq!(b.weight_sum(ri), 4.0);
        // radius N/2: the antipode is shared by both ends and gets weight 1
        assert_eq!(b.weight_sum(0), 16.0);
        let pts = b.ball_points(0, 0);
        assert!(pts.iter().all(|&(_, w)| w == 1.0));
    }

    #[test]
    fn spectral_and_direct_ball_sums_agree() {
        let g = TorusGrid::unit(2, 32).unwrap();
        let b = BoxFamily::new(g, BoxSpec::default().with_stride(1)).unwrap();
        let density: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
        for ri in 0..b.radii().len() {
            let direct: Vec<f64> = b
                .centers()
                .iter()
                .map(|&c| b.ball_points(c, ri).iter().map(|&(i, w)| w * density[i]).sum())
                .collect();
            let spectral = b.correlate(ri, &density);
            for (k, &c) in b.centers().iter().enumerate() {
                assert!((direct[k] - spectral[c]).abs() < 1e-10 * direct[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let g = TorusGrid::unit(1, 32).unwrap();
        assert!(BoxFamily::new(g, BoxSpec { j_min: 0, ..Default::default() }).is_err());
        assert!(BoxFamily::new(g, BoxSpec::default().with_stride(3)).is_err());
        assert!(BoxFamily::new(g, BoxSpec { j_min: 4, j_max: Some(2), stride: None }).is_err());
    }

    #[test]
    fn parses_colon_triplets() {
        assert_eq!(
            BoxSpec::parse("2:5:4").unwrap(),
            BoxSpec { j_min: 2, j_max: Some(5), stride: Some(4) }
        );
        assert_eq!(BoxSpec::parse("::").unwrap(), BoxSpec::default());
        assert!(BoxSpec::parse("1:2").is_err());
    }
}
