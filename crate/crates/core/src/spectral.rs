//! Transforms and Fourier multipliers.
//!
//! Mode `k` of a field on a torus of period `L` carries the symbol `2 pi |k| / L`
//! for `sqrt(-Laplacian)`. Odd symbols (gradient, Riesz, the off-diagonal part of
//! the Leray projector) ignore the Nyquist component of `k`, which has no
//! Hermitian partner; this keeps every output real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Field, SpectralField, TorusGrid};

/// The two semigroups used for extensions off the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemigroupKind {
    /// `exp(-t sqrt(-Laplacian))`
    Poisson,
    /// `exp(t Laplacian)`
    Heat,
}

impl SemigroupKind {
    /// Decay rate of mode `k`: `2 pi |k| / L` or `(2 pi |k| / L)^2`.
    pub fn rate(self, grid: &TorusGrid, k: [i64; 3]) -> f64 {
        let w = wavenumber(grid, k);
        match self {
            SemigroupKind::Poisson => w,
            SemigroupKind::Heat => w * w,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SemigroupKind::Poisson => "poisson",
            SemigroupKind::Heat => "heat",
        }
    }
}

/// Physical wavenumber `2 pi |k| / L`.
pub fn wavenumber(grid: &TorusGrid, k: [i64; 3]) -> f64 {
    let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
    2.0 * PI * k2.sqrt() / grid.period()
}

/// Wavevector with Nyquist components zeroed, for odd symbols.
pub(crate) fn odd_wavevector(grid: &TorusGrid, k: [i64; 3]) -> [i64; 3] {
    let nyq = -(grid.n() as i64 / 2);
    k.map(|c| if c == nyq { 0 } else { c })
}

pub fn forward_transform(f: &Field) -> Result<SpectralField> {
    if let Some(i) = f.samples().iter().position(|v| !v.is_finite()) {
        return Err(Error::RejectedInput(format!("non-finite sample at index {i}")));
    }
    let g = *f.grid();
    let mut data: Vec<Complex64> = f.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut data, g.dims(), g.n());
    Ok(SpectralField::from_raw(g, data))
}

/// Synthesizes real samples. The imaginary part, which vanishes for Hermitian
/// input, is dropped.
pub fn inverse_transform(fh: &SpectralField) -> Field {
    let g = *fh.grid();
    let mut data = fh.coefficients().to_vec();
    fft::inverse(&mut data, g.dims(), g.n());
    Field::new(g, data.into_iter().map(|c| c.re).collect())
        .expect("finite coefficients synthesize finite samples")
}

fn check_time(t: f64, allow_zero: bool) -> Result<()> {
    let ok = t.is_finite() && if allow_zero { t >= 0.0 } else { t > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be {}, got {t}", if allow_zero { ">= 0" } else { "> 0" })))
    }
}

/// `exp(-kind.rate(k) t)` applied mode by mode.
pub fn semigroup(fh: &SpectralField, t: f64, kind: SemigroupKind) -> Result<SpectralField> {
    check_time(t, true)?;
    let g = *fh.grid();
    Ok(fh.map_real(|k| (-kind.rate(&g, k) * t).exp()))
}

/// Poisson semigroup, symbol `exp(-2 pi |k| t / L)`.
pub fn poisson_semigroup(fh: &SpectralField, t: f64) -> Result<SpectralField> {
    semigroup(fh, t, SemigroupKind::Poisson)
}

/// Heat semigroup, symbol `exp(-4 pi^2 |k|^2 t / L^2)`.
pub fn heat_semigroup(fh: &SpectralField, t: f64) -> Result<SpectralField> {
    semigroup(fh, t, SemigroupKind::Heat)
}

/// Time derivative of the semigroup extension at `t > 0`.
pub fn extension_time_derivative(
    fh: &SpectralField,
    t: f64,
    kind: SemigroupKind,
) -> Result<SpectralField> {
    check_time(t, false)?;
    let g = *fh.grid();
    Ok(fh.map_real(|k| {
        let lam = kind.rate(&g, k);
        -lam * (-lam * t).exp()
    }))
}

/// Symbol `(2 pi |k| / L)^s` with the zero mode sent to 0, for any real `s`.
pub(crate) fn power_symbol(grid: &TorusGrid, k: [i64; 3], s: f64) -> f64 {
    if k == [0, 0, 0] {
        0.0
    } else {
        wavenumber(grid, k).powf(s)
    }
}

/// `(-Laplacian)^{s/2}` for `s` in `(-1, 1)`. The zero mode is always annihilated.
pub fn frac_laplacian_power(fh: &SpectralField, s: f64) -> Result<SpectralField> {
    if !(s > -1.0 && s < 1.0) {
        return Err(Error::Domain(format!("fractional exponent must lie in (-1, 1), got {s}")));
    }
    if s < 0.0 && !fh.is_mean_zero() {
        return Err(Error::Precondition(
            "negative fractional power needs a mean-zero input".into(),
        ));
    }
    let g = *fh.grid();
    Ok(fh.map_real(|k| power_symbol(&g, k, s)))
}

/// Riesz transform `R_j`, symbol `i k_j / |k|`.
pub fn riesz_transform(fh: &SpectralField, axis: usize) -> Result<SpectralField> {
    let g = *fh.grid();
    if axis >= g.dims() {
        return Err(Error::Domain(format!("axis {axis} out of range for {} dims", g.dims())));
    }
    Ok(fh.map_complex(|k| {
        if k == [0, 0, 0] {
            return Complex64::new(0.0, 0.0);
        }
        let kk = odd_wavevector(&g, k);
        let norm = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        Complex64::new(0.0, kk[axis] as f64 / norm)
    }))
}

/// Spectral derivative along each axis, symbol `i 2 pi k_j / L`.
pub fn spectral_gradient(fh: &SpectralField) -> Vec<SpectralField> {
    let g = *fh.grid();
    let c = 2.0 * PI / g.period();
    (0..g.dims())
        .map(|axis| {
            fh.map_complex(|k| Complex64::new(0.0, c * odd_wavevector(&g, k)[axis] as f64))
        })
        .collect()
}

pub fn spatial_gradient(fh: &SpectralField) -> Vec<Field> {
    spectral_gradient(fh).iter().map(inverse_transform).collect()
}

fn check_components(v: &[SpectralField]) -> Result<TorusGrid> {
    let first = v.first().ok_or_else(|| Error::Empty("no vector components".into()))?;
    let g = *first.grid();
    for c in v {
        g.check_same(c.grid())?;
    }
    if v.len() != g.dims() {
        return Err(Error::GridMismatch(format!(
            "{} components on a {}-dimensional grid",
            v.len(),
            g.dims()
        )));
    }
    Ok(g)
}

/// Spectral divergence `sum_j i 2 pi k_j / L v_j`.
pub fn divergence(v: &[SpectralField]) -> Result<SpectralField> {
    let g = check_components(v)?;
    let c = 2.0 * PI / g.period();
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for (axis, comp) in v.iter().enumerate() {
        for (i, (o, x)) in out.iter_mut().zip(comp.coefficients()).enumerate() {
            let kk = odd_wavevector(&g, g.wavevector(i));
            *o += Complex64::new(0.0, c * kk[axis] as f64) * x;
        }
    }
    Ok(SpectralField::from_raw(g, out))
}

/// Leray projector `delta_jl - k_j k_l / |k|^2`, the zero mode passed through.
pub fn leray_project(v: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let g = check_components(v)?;
    let dims = g.dims();
    let mut out: Vec<Vec<Complex64>> = v.iter().map(|c| c.coefficients().to_vec()).collect();
    for i in 0..g.len() {
        let kk = odd_wavevector(&g, g.wavevector(i));
        let k2: i64 = kk.iter().map(|c| c * c).sum();
        if k2 == 0 {
            continue;
        }
        let mut kv = Complex64::new(0.0, 0.0);
        for axis in 0..dims {
            kv += v[axis].coefficients()[i] * kk[axis] as f64;
        }
        for axis in 0..dims {
            out[axis][i] -= kv * (kk[axis] as f64 / k2 as f64);
        }
    }
    Ok(out.into_iter().map(|c| SpectralField::from_raw(g, c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_mode(n: usize, k: f64) -> Field {
        let g = TorusGrid::unit(1, n).unwrap();
        Field::from_fn(g, |x| (2.0 * PI * k * x[0]).cos()).unwrap()
    }

    #[test]
    fn forward_of_cosine_has_half_coefficients() {
        let fh = forward_transform(&cos_mode(8, 1.0)).unwrap();
        assert!((fh.at(&[1]) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((fh.at(&[-1]) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(fh.at(&[0]).norm() < 1e-15);
    }

    #[test]
    fn negative_time_is_rejected() {
        let fh = forward_transform(&cos_mode(8, 1.0)).unwrap();
        assert!(poisson_semigroup(&fh, -1e-3).is_err());
        assert!(heat_semigroup(&fh, -1e-3).is_err());
        assert!(extension_time_derivative(&fh, 0.0, SemigroupKind::Heat).is_err());
    }

    #[test]
    fn frac_power_domain_and_precondition() {
        let g = TorusGrid::unit(1, 8).unwrap();
        let fh = forward_transform(&Field::constant(g, 1.0)).unwrap();
        assert!(matches!(frac_laplacian_power(&fh, 1.0), Err(Error::Domain(_))));
        assert!(matches!(frac_laplacian_power(&fh, -0.5), Err(Error::Precondition(_))));
        assert!(frac_laplacian_power(&fh, 0.5).is_ok());
    }

    #[test]
    fn riesz_of_sine_is_cosine() {
        // R = d/dx (-Laplacian)^{-1/2}: d/dx sin(2 pi x) / (2 pi) = cos(2 pi x)
        let g = TorusGrid::unit(1, 16).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let r = inverse_transform(&riesz_transform(&forward_transform(&f).unwrap(), 0).unwrap());
        let expected = Field::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        assert!(r.max_abs_diff(&expected) < 1e-14);
        assert!(riesz_transform(&forward_transform(&f).unwrap(), 1).is_err());
    }

    #[test]
    fn leray_needs_matching_components() {
        let g2 = TorusGrid::unit(2, 8).unwrap();
        let g3 = TorusGrid::unit(3, 8).unwrap();
        assert!(leray_project(&[SpectralField::zeros(g2)]).is_err());
        assert!(leray_project(&[SpectralField::zeros(g2), SpectralField::zeros(g3)]).is_err());
    }
}
