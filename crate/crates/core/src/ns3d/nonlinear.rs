//! `P div(u (x) u)` by the pseudospectral method with 2/3-rule dealiasing.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fft;
use crate::grid::TorusGrid;
use crate::spectral::odd_wavevector;

use super::SpectralVector;

/// Precomputed wavevectors, dealiasing mask and heat rates for one grid.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    grid: TorusGrid,
    /// `2 pi k / L` with the Nyquist component zeroed.
    wave: Vec<[f64; 3]>,
    keep: Vec<bool>,
    rate: Vec<f64>,
    enabled: bool,
}

impl Nonlinearity {
    pub fn new(grid: TorusGrid, enabled: bool) -> Self {
        let c = 2.0 * PI / grid.period();
        let cutoff = grid.n() as f64 / 3.0;
        let mut wave = Vec::with_capacity(grid.len());
        let mut keep = Vec::with_capacity(grid.len());
        let mut rate = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let k = grid.wavevector(i);
            let kk = odd_wavevector(&grid, k);
            wave.push(kk.map(|v| c * v as f64));
            keep.push(k.iter().all(|&v| (v as f64).abs() < cutoff));
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            rate.push(c * c * k2);
        }
        Self { grid, wave, keep, rate, enabled }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    /// Heat decay rate `(2 pi |k| / L)^2` per spectral slot.
    pub fn rates(&self) -> &[f64] {
        &self.rate
    }

    /// Whether slot `i` survives the 2/3 rule.
    pub fn kept(&self, i: usize) -> bool {
        self.keep[i]
    }

    /// `N(u) = mask P div(mask u (x) mask u)`, so that `u_t = Laplacian u - N(u)`.
    /// Also returns `max_x |u(x)|` of the dealiased velocity.
    pub fn evaluate(&self, u: &SpectralVector) -> (SpectralVector, f64) {
        let g = &self.grid;
        let len = g.len();
        let zero = Complex64::new(0.0, 0.0);
        if !self.enabled {
            return ([vec![zero; len], vec![zero; len], vec![zero; len]], 0.0);
        }
        let (dims, n) = (3, g.n());
        let phys: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let mut d: Vec<Complex64> =
                    u[j].iter().zip(&self.keep).map(|(c, &k)| if k { *c } else { zero }).collect();
                fft::inverse(&mut d, dims, n);
                d.into_iter().map(|c| c.re).collect()
            })
            .collect();
        let umax = (0..len)
            .map(|i| (phys[0][i].powi(2) + phys[1][i].powi(2) + phys[2][i].powi(2)).sqrt())
            .fold(0.0, f64::max);
        // Products u_j u_l for j <= l.
        let mut prod: Vec<Vec<Complex64>> = Vec::with_capacity(6);
        let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for &(j, l) in &pairs {
            let mut d: Vec<Complex64> =
                (0..len).map(|i| Complex64::new(phys[j][i] * phys[l][i], 0.0)).collect();
            fft::forward(&mut d, dims, n);
            prod.push(d);
        }
        let pair_index = |j: usize, l: usize| {
            let (a, b) = if j <= l { (j, l) } else { (l, j) };
            pairs.iter().position(|&p| p == (a, b)).unwrap()
        };
        let mut out: SpectralVector = [vec![zero; len], vec![zero; len], vec![zero; len]];
        for i in 0..len {
            if !self.keep[i] {
                continue;
            }
            let w = self.wave[i];
            let mut d = [zero; 3];
            for (j, dj) in d.iter_mut().enumerate() {
                for (l, wl) in w.iter().enumerate() {
                    *dj += Complex64::new(0.0, *wl) * prod[pair_index(j, l)][i];
                }
            }
            let w2: f64 = w.iter().map(|v| v * v).sum();
            if w2 > 0.0 {
                let kd = d[0] * w[0] + d[1] * w[1] + d[2] * w[2];
                for j in 0..3 {
                    d[j] -= kd * (w[j] / w2);
                }
            }
            for j in 0..3 {
                out[j][i] = d[j];
            }
        }
        (out, umax)
    }

    /// Fraction of the energy of `u` in the outermost retained shell
    /// `N/3 - 2 <= max_j |k_j| < N/3`.
    pub fn shell_energy_fraction(&self, u: &SpectralVector) -> f64 {
        let g = &self.grid;
        let cutoff = g.n() as f64 / 3.0;
        let (mut shell, mut total) = (0.0, 0.0);
        for i in 0..g.len() {
            let e: f64 = (0..3).map(|j| u[j][i].norm_sqr()).sum();
            total += e;
            let k = g.wavevector(i);
            let kmax = k.iter().map(|v| v.abs()).max().unwrap() as f64;
            if kmax < cutoff && kmax >= cutoff - 2.0 {
                shell += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            shell / total
        }
    }
}
