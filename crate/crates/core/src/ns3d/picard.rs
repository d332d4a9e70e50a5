//! Fixed-point iteration of the Duhamel map over a fixed set of time nodes.
//!
//! Between consecutive nodes the nonlinear term is interpolated linearly in `s`
//! and integrated exactly against `exp(-lambda (t - s))`, which is the trapezoid
//! rule with the heat factor carried analytically:
//! `D_{i+1} = e^{-z} D_i + h (a(z) N_i + b(z) N_{i+1})`, `z = lambda h`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::nonlinear::Nonlinearity;
use super::{NSTrace, SpectralVector, TraceConfig, VelocityField};

/// How the `m` time nodes are placed in `(0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeNodes {
    /// `t_i = i T / m`
    Uniform(usize),
    /// `t_i = T (i / m)^2`, denser near `t = 0`.
    Quadratic(usize),
    /// Strictly increasing positive times; the last one is `T`.
    Explicit(Vec<f64>),
}

impl TimeNodes {
    pub fn times(&self, t_final: f64) -> Result<Vec<f64>> {
        let t = match self {
            TimeNodes::Uniform(m) => (1..=*m).map(|i| t_final * i as f64 / *m as f64).collect(),
            TimeNodes::Quadratic(m) => {
                (1..=*m).map(|i| t_final * (i as f64 / *m as f64).powi(2)).collect()
            }
            TimeNodes::Explicit(v) => v.clone(),
        };
        let ok = !t.is_empty()
            && t[0] > 0.0
            && t.windows(2).all(|w| w[1] > w[0])
            && t.iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::Domain("time nodes must be positive and strictly increasing".into()));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub nodes: TimeNodes,
    pub max_iter: usize,
    pub tol: f64,
    pub nonlinear: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { nodes: TimeNodes::Quadratic(64), max_iter: 60, tol: 1e-10, nonlinear: true }
    }
}

/// Weights `(a, b)` with `int_0^h e^{-lambda (h - s)} N(s) ds = h (a N_0 + b N_h)`
/// for `N` linear on `[0, h]`.
pub(crate) fn exp_trapezoid(z: f64) -> (f64, f64) {
    if z < 1e-3 {
        let a = 0.5 - z / 3.0 + z * z / 8.0 - z.powi(3) / 30.0 + z.powi(4) / 144.0;
        let b = 0.5 - z / 6.0 + z * z / 24.0 - z.powi(3) / 120.0 + z.powi(4) / 720.0;
        (a, b)
    } else {
        let e = (-z).exp();
        let a = (1.0 - e * (1.0 + z)) / (z * z);
        (a, (1.0 - e) / z - a)
    }
}

fn l2(v: &SpectralVector) -> f64 {
    v.iter().flat_map(|c| c.iter()).map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn l2_diff(a: &SpectralVector, b: &SpectralVector) -> f64 {
    (0..3)
        .flat_map(|j| a[j].iter().zip(&b[j]))
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Residual, or growth over the heat flow, beyond which the iteration is
/// declared divergent.
const BLOWUP: f64 = 1e6;

/// Solves the mild equation at the given nodes by Picard iteration started
/// from the heat flow. Non-convergence is reported through
/// `config.converged = false` and the residual history, not as an error.
pub fn mild_solve_picard(a: &VelocityField, t_final: f64, opts: &PicardOptions) -> Result<NSTrace> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Domain(format!("final time must be positive, got {t_final}")));
    }
    if opts.max_iter == 0 {
        return Err(Error::Domain("max_iter must be at least 1".into()));
    }
    let times = opts.nodes.times(t_final)?;
    let grid = *a.grid();
    let nl = Nonlinearity::new(grid, opts.nonlinear);
    let rates = nl.rates();
    let len = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let a_hat = a.spectral();

    let heat = |t: f64| -> SpectralVector {
        std::array::from_fn(|j| {
            a_hat[j].iter().zip(rates).map(|(c, &lam)| c * (-lam * t).exp()).collect()
        })
    };
    let mut all_t = vec![0.0];
    all_t.extend_from_slice(&times);
    let linear: Vec<SpectralVector> = all_t.iter().map(|&t| heat(t)).collect();
    let mut u = linear.clone();
    let linear_scale = linear.iter().map(l2).fold(0.0, f64::max);

    let mut residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut diverged = false;
    if opts.nonlinear {
        for _ in 0..opts.max_iter {
            iterations += 1;
            let evals: Vec<SpectralVector> = u.iter().map(|s| nl.evaluate(s).0).collect();
            let mut d: SpectralVector = std::array::from_fn(|_| vec![zero; len]);
            let mut next = Vec::with_capacity(u.len());
            next.push(linear[0].clone());
            for i in 0..times.len() {
                let h = all_t[i + 1] - all_t[i];
                let (n0, n1) = (&evals[i], &evals[i + 1]);
                for k in 0..len {
                    let z = rates[k] * h;
                    let (wa, wb) = exp_trapezoid(z);
                    let e = (-z).exp();
                    for j in 0..3 {
                        d[j][k] = d[j][k] * e + h * (wa * n0[j][k] + wb * n1[j][k]);
                    }
                }
                let state: SpectralVector =
                    std::array::from_fn(|j| linear[i + 1][j].iter().zip(&d[j]).map(|(l, x)| l - x).collect());
                next.push(state);
            }
            let scale = next.iter().map(l2).fold(0.0, f64::max);
            let diff = next.iter().zip(&u).map(|(x, y)| l2_diff(x, y)).fold(0.0, f64::max);
            let r = if scale > 0.0 { diff / scale } else { diff };
            residuals.push(r);
            u = next;
            // Geometric growth keeps the relative residual near 1, so size is checked too.
            if !r.is_finite() || r > BLOWUP || scale > BLOWUP * linear_scale {
                diverged = true;
                break;
            }
            if r <= opts.tol {
                converged = true;
                break;
            }
        }
    } else {
        converged = true;
        residuals.push(0.0);
    }

    let finite = u.iter().all(|s| s.iter().all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite())));
    let mut warnings = Vec::new();
    if diverged || !finite {
        // Keep the trace well formed: a divergent iteration has no usable states.
        warnings.push(format!(
            "Picard diverged after {iterations} iterations; states replaced by the heat flow"
        ));
        u = linear;
        converged = false;
    }
    if opts.nonlinear && converged {
        let frac = nl.shell_energy_fraction(u.last().expect("at least one node"));
        if frac > 1e-6 {
            warnings.push(format!("under-resolved: {frac:.3e} of the energy lies in the dealiasing shell"));
        }
    }
    if !converged && !diverged && finite {
        warnings.push(format!(
            "Picard did not contract in {iterations} iterations (last residual {:.3e})",
            residuals.last().copied().unwrap_or(f64::NAN)
        ));
    }
    let states: Vec<VelocityField> = u[1..].iter().map(|s| VelocityField::from_spectral(grid, s)).collect();
    Ok(NSTrace {
        grid,
        initial: a.clone(),
        times,
        states,
        config: TraceConfig {
            method: "picard".into(),
            t_final,
            nodes: all_t.len() - 1,
            dealias: "2/3".into(),
            nonlinear: opts.nonlinear,
            iterations,
            max_iter: opts.max_iter,
            tol: opts.tol,
            converged,
            residuals,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_match_closed_form_across_switch() {
        for &z in &[1e-6, 5e-4, 9.9e-4, 1.01e-3, 0.1, 3.0, 40.0] {
            let (a, b) = exp_trapezoid(z);
            // N = 1 gives (1 - e^{-z}) / z, N = s gives the first moment.
            let i0 = if z < 1e-8 { 1.0 } else { -(-z).exp_m1() / z };
            assert!((a + b - i0).abs() < 1e-13, "z={z}");
            assert!(a > 0.0 && b > 0.0);
        }
        let (a, b) = exp_trapezoid(0.0);
        assert_eq!((a, b), (0.5, 0.5));
    }

    #[test]
    fn node_layouts() {
        assert_eq!(TimeNodes::Uniform(4).times(1.0).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        let q = TimeNodes::Quadratic(2).times(1.0).unwrap();
        assert_eq!(q, vec![0.25, 1.0]);
        assert!(TimeNodes::Explicit(vec![0.5, 0.2]).times(1.0).is_err());
        assert!(TimeNodes::Explicit(vec![]).times(1.0).is_err());
    }
}
