//! Periodic lattices, real sampled fields and their Fourier coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform lattice of `N^n` points on the torus `[0, L)^n`, `n <= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dims: usize,
    points_per_axis: usize,
    period: f64,
}

impl TorusGrid {
    /// `points_per_axis` must be a power of two (at least 2) so that dilation by
    /// two maps the lattice onto itself.
    pub fn new(dims: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidGrid(format!("dims must be 1, 2 or 3, got {dims}")));
        }
        if points_per_axis < 2 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 2, got {points_per_axis}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        Ok(Self { dims, points_per_axis, period })
    }

    /// Grid on the unit torus.
    pub fn unit(dims: usize, points_per_axis: usize) -> Result<Self> {
        Self::new(dims, points_per_axis, 1.0)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.points_per_axis
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing `L/N`.
    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    /// Volume of one lattice cell, `(L/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dims as i32)
    }

    /// log2 of the number of points per axis.
    pub fn levels(&self) -> u32 {
        self.points_per_axis.trailing_zeros()
    }

    /// Same torus with a different resolution.
    pub fn with_points(&self, points_per_axis: usize) -> Result<Self> {
        Self::new(self.dims, points_per_axis, self.period)
    }

    /// Row-major strides, axis 0 slowest. Unused axes get stride 0.
    pub fn strides(&self) -> [usize; 3] {
        let mut s = [0usize; 3];
        let mut acc = 1;
        for axis in (0..self.dims).rev() {
            s[axis] = acc;
            acc *= self.points_per_axis;
        }
        s
    }

    /// Multi-index of a flat index. Unused axes are 0.
    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut c = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dims).rev() {
            c[axis] = rem % n;
            rem /= n;
        }
        c
    }

    /// Flat index of a multi-index; coordinates are reduced modulo `N`.
    pub fn index(&self, coords: &[i64]) -> usize {
        let n = self.points_per_axis as i64;
        coords[..self.dims]
            .iter()
            .fold(0usize, |acc, &c| acc * self.points_per_axis + c.rem_euclid(n) as usize)
    }

    /// Signed frequency of FFT slot `i`, in `[-N/2, N/2)`.
    pub fn frequency(&self, i: usize) -> i64 {
        let n = self.points_per_axis;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Integer wavevector of a flat spectral index. Unused axes are 0.
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let c = self.coords(flat);
        let mut k = [0i64; 3];
        for axis in 0..self.dims {
            k[axis] = self.frequency(c[axis]);
        }
        k
    }

    /// Physical position of a lattice point. Unused axes are 0.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let c = self.coords(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dims {
            x[axis] = c[axis] as f64 * h;
        }
        x
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real samples of a function on a [`TorusGrid`], row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: TorusGrid,
    samples: Vec<f64>,
}

impl Field {
    pub fn new(grid: TorusGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::RejectedInput(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::RejectedInput(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, samples: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Self {
        Self { grid, samples: vec![value; grid.len()] }
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `|mean| <= 1e-12 * max|f|`.
    pub fn is_mean_zero(&self) -> bool {
        self.mean().abs() <= 1e-12 * self.max_abs()
    }

    /// Subtracts the mean; returns the mean-zero field and the removed mean.
    pub fn without_mean(&self) -> (Field, f64) {
        let m = self.mean();
        let samples = self.samples.iter().map(|v| v - m).collect();
        (Field { grid: self.grid, samples }, m)
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { grid: self.grid, samples: self.samples.iter().map(|v| c * v).collect() }
    }

    /// Discrete `L^2` norm with cell volume `(L/N)^n`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Fourier coefficients `c(k) = N^{-n} sum_x f(x) e^{-2 pi i k.x / L}` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::RejectedInput(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::RejectedInput("non-finite coefficient".into()));
        }
        Ok(Self { grid, coefficients })
    }

    pub(crate) fn from_raw(grid: TorusGrid, coefficients: Vec<Complex64>) -> Self {
        debug_assert_eq!(coefficients.len(), grid.len());
        Self { grid, coefficients }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, coefficients: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    /// Coefficient at integer wavevector `k` (components taken modulo `N`).
    pub fn at(&self, k: &[i64]) -> Complex64 {
        self.coefficients[self.grid.index(k)]
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coefficients[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// `|c(0)| <= 1e-12 * max|c|`.
    pub fn is_mean_zero(&self) -> bool {
        self.coefficients[0].norm() <= 1e-12 * self.max_abs()
    }

    /// Largest `|c(-k) - conj(c(k))|`, with the Nyquist slots paired to themselves.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, c) in self.coefficients.iter().enumerate() {
            let k = self.grid.wavevector(i);
            let neg = [-k[0], -k[1], -k[2]];
            let d = (self.at(&neg) - c.conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Applies a real multiplier `m(k)` to every coefficient.
    pub fn map_real(&self, m: impl Fn([i64; 3]) -> f64) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(self.grid.wavevector(i)))
            .collect();
        SpectralField { grid: self.grid, coefficients }
    }

    /// Applies a complex multiplier `m(k)` to every coefficient.
    pub fn map_complex(&self, m: impl Fn([i64; 3]) -> Complex64) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(self.grid.wavevector(i)))
            .collect();
        SpectralField { grid: self.grid, coefficients }
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(TorusGrid::unit(1, 12).is_err());
        assert!(TorusGrid::unit(4, 8).is_err());
        assert!(TorusGrid::new(1, 8, 0.0).is_err());
        assert!(TorusGrid::unit(3, 8).is_ok());
    }

    #[test]
    fn index_and_coords_round_trip() {
        let g = TorusGrid::unit(3, 8).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            let c = g.coords(flat);
            let ci: Vec<i64> = c.iter().map(|&v| v as i64).collect();
            assert_eq!(g.index(&ci), flat);
        }
        assert_eq!(g.index(&[-1, 0, 0]), 7 * 64);
    }

    #[test]
    fn frequencies_cover_half_open_range() {
        let g = TorusGrid::unit(1, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.frequency(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = TorusGrid::unit(1, 4).unwrap();
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn mean_removal() {
        let g = TorusGrid::unit(1, 4).unwrap();
        let f = Field::new(g, vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let (z, m) = f.without_mean();
        assert_eq!(m, 3.0);
        assert!(z.is_mean_zero());
    }
}
