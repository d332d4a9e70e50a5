//! Incompressible Navier-Stokes on the periodic box `[0, L)^3` with unit
//! viscosity, in mild form
//! `u(t) = e^{t Laplacian} a - int_0^t e^{(t-s) Laplacian} P div(u (x) u) ds`.
//!
//! Two integrators share one dealiased nonlinearity: Picard iteration of the
//! Duhamel map over stored time nodes ([`mild_solve_picard`]) and an
//! integrating-factor RK4 reference ([`step_ifrk4`]).

mod ifrk4;
mod nonlinear;
mod picard;
pub mod probes;

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boxes::BoxFamily;
use crate::error::{Error, Result};
use crate::grid::{Field, SpectralField, TorusGrid};
use crate::norms::carleson::inverse_space_norm;
use crate::norms::xspace::{x_space_norm, ScalarTrace, XNormReport};
use crate::spectral::{divergence, forward_transform, inverse_transform, leray_project};

pub use ifrk4::{step_ifrk4, IfRk4Options};
pub use nonlinear::Nonlinearity;
pub use picard::{mild_solve_picard, PicardOptions, TimeNodes};
pub use probes::{inflation_probe, smalldata_probe, InflationConfig, InflationReport, SmallDataConfig, SmallDataReport};

pub(crate) type SpectralVector = [Vec<Complex64>; 3];

/// Three velocity components on a common 3D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: TorusGrid,
    components: [Field; 3],
}

fn check_grid(grid: &TorusGrid) -> Result<()> {
    if grid.dims() != 3 {
        return Err(Error::InvalidGrid(format!("velocity fields need a 3D grid, got {}D", grid.dims())));
    }
    Ok(())
}

/// Leray-projects `v`.
pub fn make_divergence_free(v: [Field; 3]) -> Result<VelocityField> {
    let grid = *v[0].grid();
    check_grid(&grid)?;
    for c in &v {
        grid.check_same(c.grid())?;
    }
    let hats: Vec<SpectralField> = v.iter().map(forward_transform).collect::<Result<_>>()?;
    let p = leray_project(&hats)?;
    Ok(VelocityField {
        grid,
        components: [inverse_transform(&p[0]), inverse_transform(&p[1]), inverse_transform(&p[2])],
    })
}

impl VelocityField {
    /// Wraps components without projecting them.
    pub fn from_components(v: [Field; 3]) -> Result<Self> {
        let grid = *v[0].grid();
        check_grid(&grid)?;
        for c in &v {
            grid.check_same(c.grid())?;
        }
        Ok(Self { grid, components: v })
    }

    pub fn zeros(grid: TorusGrid) -> Result<Self> {
        check_grid(&grid)?;
        Ok(Self { grid, components: [Field::zeros(grid), Field::zeros(grid), Field::zeros(grid)] })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn components(&self) -> &[Field; 3] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Field {
        &self.components[j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, components: self.components.clone().map(|f| f.scaled(c)) }
    }

    pub(crate) fn spectral(&self) -> SpectralVector {
        self.components
            .clone()
            .map(|f| forward_transform(&f).expect("finite samples").into_coefficients())
    }

    pub(crate) fn from_spectral(grid: TorusGrid, s: &SpectralVector) -> Self {
        let comp = |j: usize| inverse_transform(&SpectralField::from_raw(grid, s[j].clone()));
        Self { grid, components: [comp(0), comp(1), comp(2)] }
    }

    /// `max_k |k . u^(k)| / max_k |u^(k)|` with integer wavevectors.
    pub fn divergence_ratio(&self) -> f64 {
        let hats: Vec<SpectralField> =
            self.components.iter().map(|f| forward_transform(f).expect("finite samples")).collect();
        let div = divergence(&hats).expect("three components on a 3D grid");
        let scale = hats.iter().map(|h| h.max_abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        // divergence() carries the factor 2 pi / L
        div.max_abs() * self.grid.period() / (2.0 * std::f64::consts::PI) / scale
    }

    /// Kinetic energy `1/2 int |u|^2`.
    pub fn energy(&self) -> f64 {
        let s: f64 = self.components.iter().flat_map(|c| c.samples()).map(|v| v * v).sum();
        0.5 * s * self.grid.cell_volume()
    }

    /// `L^2` norm of the vector field.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * self.energy()).sqrt()
    }

    /// Largest pointwise Euclidean length `|u(x)|`.
    pub fn max_magnitude(&self) -> f64 {
        let [a, b, c] = &self.components;
        a.samples()
            .iter()
            .zip(b.samples())
            .zip(c.samples())
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .fold(0.0, f64::max)
    }

    /// `||self - other||_2 / ||other||_2`.
    pub fn relative_l2_distance(&self, other: &VelocityField) -> f64 {
        let mut d = 0.0;
        let mut n = 0.0;
        for j in 0..3 {
            for (a, b) in self.components[j].samples().iter().zip(other.components[j].samples()) {
                d += (a - b) * (a - b);
                n += b * b;
            }
        }
        if n == 0.0 {
            d.sqrt()
        } else {
            (d / n).sqrt()
        }
    }

    /// `2 u(2 x)` sampled on the same lattice: the Navier-Stokes rescaling with
    /// `lambda = 2`, exact because `2 x` maps lattice points to lattice points.
    pub fn dilated(&self) -> VelocityField {
        let g = self.grid;
        let n = g.n() as i64;
        let comp = |f: &Field| {
            let s = f.samples();
            let samples = (0..g.len())
                .map(|i| {
                    let c = g.coords(i);
                    2.0 * s[g.index(&[2 * c[0] as i64 % n, 2 * c[1] as i64 % n, 2 * c[2] as i64 % n])]
                })
                .collect();
            Field::new(g, samples).expect("finite samples")
        };
        VelocityField {
            grid: g,
            components: [comp(&self.components[0]), comp(&self.components[1]), comp(&self.components[2])],
        }
    }
}

/// Run parameters stored with a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub method: String,
    pub t_final: f64,
    pub nodes: usize,
    pub dealias: String,
    pub nonlinear: bool,
    pub iterations: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub converged: bool,
    /// Picard residual after each sweep; empty for the RK4 reference.
    pub residuals: Vec<f64>,
}

/// Time series of a solution: the data at `t = 0` and states at `0 < t_1 < ... < t_m`.
#[derive(Debug, Clone)]
pub struct NSTrace {
    pub grid: TorusGrid,
    pub initial: VelocityField,
    pub times: Vec<f64>,
    pub states: Vec<VelocityField>,
    pub config: TraceConfig,
    pub warnings: Vec<String>,
}

impl NSTrace {
    pub fn last(&self) -> &VelocityField {
        self.states.last().unwrap_or(&self.initial)
    }

    /// Energies at `t = 0` and every stored time.
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(&self.initial).chain(&self.states).map(|v| v.energy()).collect()
    }

    /// State at a stored time, matched within `1e-12` relative.
    pub fn state_at(&self, t: f64) -> Option<&VelocityField> {
        if t == 0.0 {
            return Some(&self.initial);
        }
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1e-300))
            .map(|i| &self.states[i])
    }

    /// One component as a scalar trace.
    pub fn component_trace(&self, j: usize) -> Result<ScalarTrace> {
        ScalarTrace::new(
            self.initial.component(j).clone(),
            self.times.clone(),
            self.states.iter().map(|s| s.component(j).clone()).collect(),
        )
    }

    /// Writes per-node component fields and a JSON manifest.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let all = std::iter::once(&self.initial).chain(&self.states);
        for (q, v) in all.enumerate() {
            let mut names = Vec::new();
            for j in 0..3 {
                let name = format!("node_{q:04}_u{j}.tlab");
                crate::io::save_field(v.component(j), dir.join(&name))?;
                names.push(name);
            }
            files.push(names);
        }
        let mut times = vec![0.0];
        times.extend_from_slice(&self.times);
        let manifest = serde_json::json!({
            "grid": self.grid,
            "times": times,
            "config": self.config,
            "warnings": self.warnings,
            "files": files,
        });
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

/// `sum_j ||a_j||_{3+2 alpha, -1, T}`.
pub fn initial_data_norm(a: &VelocityField, alpha: f64, t_max: f64, boxes: &BoxFamily) -> Result<f64> {
    let mut s = 0.0;
    for c in a.components() {
        s += inverse_space_norm(c, alpha, t_max, boxes)?.value;
    }
    Ok(s)
}

/// Componentwise sum of the space-time norms over the trace.
pub fn solution_x_norm(trace: &NSTrace, alpha: f64, t_max: f64, boxes: &BoxFamily) -> Result<XNormReport> {
    let mut out = XNormReport::zero();
    for j in 0..3 {
        let r = x_space_norm(&trace.component_trace(j)?, alpha, t_max, boxes)?;
        out.sup_part += r.sup_part;
        out.carleson_part += r.carleson_part;
        out.total += r.total;
    }
    Ok(out)
}

/// The 2D Taylor-Green vortex `A (sin x cos y, -cos x sin y, 0)` with `x, y`
/// scaled by `2 pi / L`.
pub fn taylor_green(grid: TorusGrid, amplitude: f64) -> Result<VelocityField> {
    check_grid(&grid)?;
    let w = 2.0 * std::f64::consts::PI / grid.period();
    let u = Field::from_fn(grid, |x| amplitude * (w * x[0]).sin() * (w * x[1]).cos())?;
    let v = Field::from_fn(grid, |x| -amplitude * (w * x[0]).cos() * (w * x[1]).sin())?;
    VelocityField::from_components([u, v, Field::zeros(grid)])
}
