//! Small-data and norm-inflation experiments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boxes::{BoxFamily, BoxSpec};
use crate::corpus::{generate, CorpusKind, CorpusSpec};
use crate::error::{Error, Result};
use crate::grid::{Field, TorusGrid};
use crate::norms::xspace::XNormReport;

use super::ifrk4::{step_ifrk4, IfRk4Options};
use super::picard::{mild_solve_picard, PicardOptions, TimeNodes};
use super::{initial_data_norm, make_divergence_free, solution_x_norm, NSTrace, VelocityField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDataConfig {
    pub alpha: f64,
    pub t_final: f64,
    pub grid_n: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
    /// Band limit of the random shape.
    pub shape_max_freq: usize,
    pub nodes: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub ratio_bound: f64,
    pub boxes: BoxSpec,
    /// Disables the nonlinear term, leaving the heat flow.
    pub linear_only: bool,
}

impl SmallDataConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            t_final: 0.1,
            grid_n: 32,
            deltas: vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
            seed: 7,
            shape_max_freq: 2,
            nodes: 64,
            max_iter: 40,
            tol: 1e-10,
            ratio_bound: 4.0,
            boxes: BoxSpec::default(),
            linear_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDataRow {
    pub delta: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Last Picard residual; absent when the iterates stopped being finite.
    pub final_residual: Option<f64>,
    /// Norm parts, present for converged runs only.
    pub sup_part: Option<f64>,
    pub carleson_part: Option<f64>,
    pub x_norm: Option<f64>,
    /// `x_norm / delta`; absent for `delta = 0` and for runs that did not converge.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDataReport {
    pub alpha: f64,
    pub t_final: f64,
    pub grid_n: usize,
    /// Initial-data norm of the unscaled shape before normalization.
    pub shape_norm: f64,
    /// `X` norm of the heat flow of the normalized shape: the `delta -> 0` limit of the ratio.
    pub linear_ratio: f64,
    /// Smallest `delta` on the ladder at which Picard failed to contract.
    pub threshold: Option<f64>,
    pub rows: Vec<SmallDataRow>,
    /// Largest ratio among converged rows below the threshold.
    pub max_ratio_below_threshold: Option<f64>,
    pub ratio_bound: f64,
    /// At least one positive `delta` below the threshold converged, and all such
    /// ratios are within `ratio_bound`.
    pub passes: bool,
}

/// Fixed random divergence-free shape with initial-data norm 1, and its original norm.
pub fn smalldata_shape(cfg: &SmallDataConfig, boxes: &BoxFamily) -> Result<(VelocityField, f64)> {
    let grid = *boxes.grid();
    let comps: Vec<Field> = (0..3)
        .map(|j| {
            let spec = CorpusSpec::new(
                format!("shape_u{j}"),
                cfg.seed + j as u64,
                CorpusKind::FracNoise { decay: 1.0 },
                cfg.shape_max_freq,
            );
            generate(&spec, &grid)
        })
        .collect::<Result<_>>()?;
    let v = make_divergence_free([comps[0].clone(), comps[1].clone(), comps[2].clone()])?;
    let norm = initial_data_norm(&v, cfg.alpha, cfg.t_final, boxes)?;
    if !(norm > 0.0) {
        return Err(Error::UndefinedRatio("random shape has zero initial-data norm".into()));
    }
    Ok((v.scaled(1.0 / norm), norm))
}

/// Runs Picard on `delta * shape` for every `delta` of the ladder.
pub fn smalldata_probe(cfg: &SmallDataConfig) -> Result<SmallDataReport> {
    if cfg.deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Domain("amplitudes must be finite and non-negative".into()));
    }
    let grid = TorusGrid::unit(3, cfg.grid_n)?;
    let boxes = BoxFamily::new(grid, cfg.boxes)?;
    let (shape, shape_norm) = smalldata_shape(cfg, &boxes)?;
    let opts = PicardOptions {
        nodes: TimeNodes::Quadratic(cfg.nodes),
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        nonlinear: !cfg.linear_only,
    };
    let linear = mild_solve_picard(&shape, cfg.t_final, &PicardOptions { nonlinear: false, ..opts.clone() })?;
    let linear_ratio = solution_x_norm(&linear, cfg.alpha, cfg.t_final, &boxes)?.total;

    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        let a = shape.scaled(delta);
        let trace = mild_solve_picard(&a, cfg.t_final, &opts)?;
        let x = if trace.config.converged {
            Some(solution_x_norm(&trace, cfg.alpha, cfg.t_final, &boxes)?)
        } else {
            None
        };
        let ratio = x.as_ref().filter(|_| delta > 0.0).map(|x| x.total / delta);
        rows.push(SmallDataRow {
            delta,
            converged: trace.config.converged,
            iterations: trace.config.iterations,
            final_residual: trace.config.residuals.last().copied().filter(|r| r.is_finite()),
            sup_part: x.as_ref().map(|x| x.sup_part),
            carleson_part: x.as_ref().map(|x| x.carleson_part),
            x_norm: x.as_ref().map(|x| x.total),
            ratio,
        });
    }
    let threshold = rows.iter().find(|r| !r.converged).map(|r| r.delta);
    let below: Vec<f64> = rows
        .iter()
        .filter(|r| threshold.is_none_or(|t| r.delta < t))
        .filter_map(|r| r.ratio)
        .collect();
    let max_ratio_below_threshold = below.iter().copied().reduce(f64::max);
    let passes = !below.is_empty() && below.iter().all(|&r| r <= cfg.ratio_bound);
    Ok(SmallDataReport {
        alpha: cfg.alpha,
        t_final: cfg.t_final,
        grid_n: cfg.grid_n,
        shape_norm,
        linear_ratio,
        threshold,
        rows,
        max_ratio_below_threshold,
        ratio_bound: cfg.ratio_bound,
        passes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationConfig {
    pub alpha: f64,
    pub epsilon: f64,
    /// Number of shear modes `K`.
    pub modes: usize,
    pub grid_n: usize,
    /// Mode `m` oscillates at frequency `base_freq * (m + 1)`.
    pub base_freq: usize,
    pub t0: f64,
    pub steps: usize,
    pub boxes: BoxSpec,
    pub linear_only: bool,
}

impl InflationConfig {
    pub fn new(alpha: f64, epsilon: f64, modes: usize) -> Self {
        Self {
            alpha,
            epsilon,
            modes,
            grid_n: 32,
            base_freq: 1,
            t0: 0.02,
            steps: 400,
            boxes: BoxSpec::default(),
            linear_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub modes: usize,
    pub grid_n: usize,
    pub t0: f64,
    pub steps: usize,
    /// `||a||_{3+2 alpha, -1, infinity}` after scaling (equals `epsilon`).
    pub initial_norm: f64,
    /// `sup_{t <= T0} sqrt(t) max_x |u|` of the computed solution.
    pub sup_solution: f64,
    /// The same quantity for the heat flow of the data.
    pub sup_linear: f64,
    pub growth_ratio: f64,
    pub x_norm: XNormReport,
    pub warnings: Vec<String>,
}

/// `K` shear flows: mode `m` moves along axis `m mod 3` and varies along axis
/// `(m + 1) mod 3`, so a single mode is an exact steady profile of the
/// nonlinearity. Amplitudes grow with frequency so every mode has comparable
/// size in negative-regularity norms.
pub fn shear_modes(grid: TorusGrid, modes: usize, base_freq: usize) -> Result<VelocityField> {
    if modes == 0 {
        return Err(Error::Domain("need at least one shear mode".into()));
    }
    let top = base_freq * modes;
    if base_freq == 0 || 3 * top >= grid.n() {
        return Err(Error::Aliasing(format!(
            "frequency {top} is not resolved by the 2/3 rule at N = {}",
            grid.n()
        )));
    }
    let l = grid.period();
    let mut comps = [Field::zeros(grid), Field::zeros(grid), Field::zeros(grid)];
    for m in 0..modes {
        let (dir, axis) = (m % 3, (m + 1) % 3);
        let k = (base_freq * (m + 1)) as f64;
        let phase = 0.7 * m as f64;
        let mode = Field::from_fn(grid, |x| k * (2.0 * PI * k * x[axis] / l + phase).cos())?;
        let sum: Vec<f64> = comps[dir].samples().iter().zip(mode.samples()).map(|(a, b)| a + b).collect();
        comps[dir] = Field::new(grid, sum)?;
    }
    VelocityField::from_components(comps)
}

fn sup_sqrt_t(trace: &NSTrace) -> f64 {
    trace
        .times
        .iter()
        .zip(&trace.states)
        .map(|(t, s)| t.sqrt() * s.max_magnitude())
        .fold(0.0, f64::max)
}

/// Integrates the shear superposition scaled to initial-data norm `epsilon`
/// with and without the nonlinear term and compares `sup sqrt(t) |u|`.
pub fn inflation_probe(cfg: &InflationConfig) -> Result<InflationReport> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Domain(format!("inflation probe needs alpha in (0, 1), got {}", cfg.alpha)));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let grid = TorusGrid::unit(3, cfg.grid_n)?;
    let boxes = BoxFamily::new(grid, cfg.boxes)?;
    let shape = shear_modes(grid, cfg.modes, cfg.base_freq)?;
    let norm = initial_data_norm(&shape, cfg.alpha, f64::INFINITY, &boxes)?;
    let a = shape.scaled(cfg.epsilon / norm);
    let initial_norm = initial_data_norm(&a, cfg.alpha, f64::INFINITY, &boxes)?;
    let nonlinear = IfRk4Options { record_every: 1, nonlinear: !cfg.linear_only };
    let solution = step_ifrk4(&a, cfg.t0, cfg.steps, &nonlinear)?;
    let linear = step_ifrk4(&a, cfg.t0, cfg.steps, &IfRk4Options { record_every: 1, nonlinear: false })?;
    let sup_solution = sup_sqrt_t(&solution);
    let sup_linear = sup_sqrt_t(&linear);
    let x_norm = solution_x_norm(&solution, cfg.alpha, cfg.t0, &boxes)?;
    Ok(InflationReport {
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        modes: cfg.modes,
        grid_n: cfg.grid_n,
        t0: cfg.t0,
        steps: cfg.steps,
        initial_norm,
        sup_solution,
        sup_linear,
        growth_ratio: sup_solution / sup_linear,
        x_norm,
        warnings: solution.warnings,
    })
}
