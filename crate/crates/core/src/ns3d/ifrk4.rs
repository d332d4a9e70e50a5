//! Integrating-factor RK4 for `u_t = Laplacian u - N(u)` in Fourier space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::nonlinear::Nonlinearity;
use super::{NSTrace, SpectralVector, TraceConfig, VelocityField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfRk4Options {
    /// Store a state every this many steps (the final step is always stored).
    pub record_every: usize,
    pub nonlinear: bool,
}

impl Default for IfRk4Options {
    fn default() -> Self {
        Self { record_every: 1, nonlinear: true }
    }
}

const CFL_LIMIT: f64 = 0.5;

fn combine(terms: &[(&SpectralVector, &[f64], f64)], len: usize) -> SpectralVector {
    std::array::from_fn(|j| {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (v, mult, c) in terms {
            for k in 0..len {
                out[k] += v[j][k] * (mult[k] * c);
            }
        }
        out
    })
}

/// Advances `a` to `t_final` in `steps` equal steps.
pub fn step_ifrk4(a: &VelocityField, t_final: f64, steps: usize, opts: &IfRk4Options) -> Result<NSTrace> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Domain(format!("final time must be positive, got {t_final}")));
    }
    if steps == 0 || opts.record_every == 0 {
        return Err(Error::Domain("steps and record_every must be positive".into()));
    }
    let grid = *a.grid();
    let len = grid.len();
    let nl = Nonlinearity::new(grid, opts.nonlinear);
    let dt = t_final / steps as f64;
    let e1: Vec<f64> = nl.rates().iter().map(|l| (-l * dt).exp()).collect();
    let e2: Vec<f64> = nl.rates().iter().map(|l| (-l * dt / 2.0).exp()).collect();
    let ones = vec![1.0; len];
    let dx = grid.spacing();

    let mut u = a.spectral();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut warnings = Vec::new();
    let mut worst_cfl: f64 = 0.0;
    let neg = |v: SpectralVector| v.map(|c| c.into_iter().map(|x| -x).collect::<Vec<_>>());
    for step in 1..=steps {
        let (n1, umax) = nl.evaluate(&u);
        let umax = if opts.nonlinear { umax } else { a.max_magnitude() };
        worst_cfl = worst_cfl.max(umax * dt / dx);
        let k1 = neg(n1);
        let u2 = combine(&[(&u, &e2, 1.0), (&k1, &e2, dt / 2.0)], len);
        let k2 = neg(nl.evaluate(&u2).0);
        let u3 = combine(&[(&u, &e2, 1.0), (&k2, &ones, dt / 2.0)], len);
        let k3 = neg(nl.evaluate(&u3).0);
        let u4 = combine(&[(&u, &e1, 1.0), (&k3, &e2, dt)], len);
        let k4 = neg(nl.evaluate(&u4).0);
        u = combine(
            &[
                (&u, &e1, 1.0),
                (&k1, &e1, dt / 6.0),
                (&k2, &e2, dt / 3.0),
                (&k3, &e2, dt / 3.0),
                (&k4, &ones, dt / 6.0),
            ],
            len,
        );
        if u.iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
            return Err(Error::Domain(format!("integration blew up at step {step}")));
        }
        if step % opts.record_every == 0 || step == steps {
            times.push(dt * step as f64);
            states.push(VelocityField::from_spectral(grid, &u));
        }
    }
    if worst_cfl > CFL_LIMIT {
        warnings.push(format!("CFL number {worst_cfl:.3} exceeds {CFL_LIMIT}"));
    }
    if opts.nonlinear {
        let frac = nl.shell_energy_fraction(&u);
        if frac > 1e-6 {
            warnings.push(format!("under-resolved: {frac:.3e} of the energy lies in the dealiasing shell"));
        }
    }
    let nodes = times.len();
    Ok(NSTrace {
        grid,
        initial: a.clone(),
        times,
        states,
        config: TraceConfig {
            method: "ifrk4".into(),
            t_final,
            nodes,
            dealias: "2/3".into(),
            nonlinear: opts.nonlinear,
            iterations: steps,
            max_iter: steps,
            tol: 0.0,
            converged: true,
            residuals: Vec::new(),
        },
        warnings,
    })
}
