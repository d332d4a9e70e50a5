//! Seeded test functions.
//!
//! Spectral kinds draw their coefficients frequency by frequency in a fixed
//! order over the cube `|k|_inf <= max_freq`, so a spec describes the same
//! band-limited function at every resolution above its band.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Field, SpectralField, TorusGrid};
use crate::spectral::inverse_transform;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusKind {
    /// A few random cosines with random phases.
    TrigPoly { terms: usize },
    /// Gaussian coefficients with magnitude `|k|^{-decay}`.
    FracNoise { decay: f64 },
    /// Periodized derivative of a Gaussian centered at the middle of the torus,
    /// narrow enough that its spectrum falls below `1e-16` at `max_freq`.
    Bump,
    /// `cos(2 pi mode x_0 / L)`.
    SingleMode { mode: usize },
    /// Lanczos-smoothed square wave along the first axis, odd harmonics up to `max_freq`.
    StepLike,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub name: String,
    pub seed: u64,
    #[serde(flatten)]
    pub kind: CorpusKind,
    pub max_freq: usize,
    pub amplitude: f64,
}

impl CorpusSpec {
    pub fn new(name: impl Into<String>, seed: u64, kind: CorpusKind, max_freq: usize) -> Self {
        Self { name: name.into(), seed, kind, max_freq, amplitude: 1.0 }
    }
}

/// `sqrt(2 ln 1e16) / (2 pi)`: a Gaussian of width `c L / K` has spectrum
/// `1e-16` at frequency `K`.
const BUMP_WIDTH: f64 = 1.366_193_816_687_022_8;

pub fn generate(spec: &CorpusSpec, grid: &TorusGrid) -> Result<Field> {
    let half = grid.n() / 2;
    if spec.max_freq == 0 || spec.max_freq >= half {
        return Err(Error::Aliasing(format!(
            "max_freq {} must lie in 1..{} for N = {}",
            spec.max_freq,
            half,
            grid.n()
        )));
    }
    if !spec.amplitude.is_finite() {
        return Err(Error::RejectedInput("amplitude must be finite".into()));
    }
    let a = spec.amplitude;
    let l = grid.period();
    let field = match spec.kind {
        CorpusKind::SingleMode { mode } => {
            if mode == 0 || mode >= half {
                return Err(Error::Aliasing(format!("mode {mode} outside 1..{half}")));
            }
            Field::from_fn(*grid, |x| a * (2.0 * PI * mode as f64 * x[0] / l).cos())?
        }
        CorpusKind::StepLike => {
            let k_max = spec.max_freq;
            Field::from_fn(*grid, |x| {
                let mut s = 0.0;
                for k in (1..=k_max).step_by(2) {
                    let z = PI * k as f64 / (k_max + 1) as f64;
                    let sigma = z.sin() / z;
                    s += 4.0 / (PI * k as f64) * sigma * (2.0 * PI * k as f64 * x[0] / l).sin();
                }
                a * s
            })?
        }
        CorpusKind::Bump => {
            let sigma = BUMP_WIDTH * l / spec.max_freq as f64;
            let images = (4.0 * sigma / l).ceil() as i64 + 1;
            let dims = grid.dims();
            let f = Field::from_fn(*grid, |x| {
                let mut total = 0.0;
                let mut m = [0i64; 3];
                let span = |axis: usize| if axis < dims { -images..=images } else { 0..=0 };
                for m0 in span(0) {
                    m[0] = m0;
                    for m1 in span(1) {
                        m[1] = m1;
                        for m2 in span(2) {
                            m[2] = m2;
                            let mut r2 = 0.0;
                            let mut lead = 0.0;
                            for axis in 0..dims {
                                let d = (x[axis] - 0.5 * l + m[axis] as f64 * l) / sigma;
                                r2 += d * d;
                                if axis == 0 {
                                    lead = d;
                                }
                            }
                            total += lead * (-0.5 * r2).exp();
                        }
                    }
                }
                a * total
            })?;
            f.without_mean().0
        }
        CorpusKind::FracNoise { decay } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            spectral_field(grid, spec.max_freq, |k, _| {
                let norm = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                Some(Complex64::new(g1, g2) * (a * norm.powf(-decay) / 2f64.sqrt()))
            })
        }
        CorpusKind::TrigPoly { terms } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let kmax = spec.max_freq as i64;
            let dims = grid.dims();
            let mut modes: Vec<([i64; 3], Complex64)> = Vec::with_capacity(terms);
            for _ in 0..terms {
                let mut k = [0i64; 3];
                while k == [0, 0, 0] {
                    for c in k.iter_mut().take(dims) {
                        *c = rng.random_range(-kmax..=kmax);
                    }
                }
                let amp: f64 = rng.sample(StandardNormal);
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                modes.push((canonical(k), Complex64::from_polar(0.5 * a * amp, phase)));
            }
            let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (k, c) in modes {
                coeffs[grid.index(&k)] += c;
                coeffs[grid.index(&[-k[0], -k[1], -k[2]])] += c.conj();
            }
            inverse_transform(&SpectralField::new(*grid, coeffs)?)
        }
    };
    Ok(field)
}

/// `k` or `-k`, whichever has its first nonzero component positive.
fn canonical(k: [i64; 3]) -> [i64; 3] {
    let first = k.iter().find(|&&c| c != 0).copied().unwrap_or(0);
    if first < 0 {
        [-k[0], -k[1], -k[2]]
    } else {
        k
    }
}

/// Builds a Hermitian spectrum by visiting the half cube `|k|_inf <= kmax`
/// (first nonzero component positive) in lexicographic order.
fn spectral_field(
    grid: &TorusGrid,
    kmax: usize,
    mut coef: impl FnMut([i64; 3], usize) -> Option<Complex64>,
) -> Field {
    let dims = grid.dims();
    let km = kmax as i64;
    let span = |axis: usize| if axis < dims { -km..=km } else { 0..=0 };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut count = 0;
    for a in span(0) {
        for b in span(1) {
            for c in span(2) {
                let k = [a, b, c];
                if k == [0, 0, 0] || canonical(k) != k {
                    continue;
                }
                if let Some(v) = coef(k, count) {
                    coeffs[grid.index(&k)] = v;
                    coeffs[grid.index(&[-a, -b, -c])] = v.conj();
                }
                count += 1;
            }
        }
    }
    inverse_transform(&SpectralField::from_raw(*grid, coeffs))
}

/// The 20-member default corpus: eight fractional noises with decays evenly
/// spaced in `[0.25, 1.75]`, six trigonometric polynomials, three single modes
/// and three smoothed steps, all band-limited to frequency 32 or below.
pub fn default_corpus(seed: u64) -> Vec<CorpusSpec> {
    let mut out = Vec::with_capacity(20);
    for i in 0..8 {
        let decay = 0.25 + 1.5 * i as f64 / 7.0;
        out.push(CorpusSpec::new(
            format!("frac_noise_{i}"),
            seed.wrapping_add(i as u64),
            CorpusKind::FracNoise { decay },
            32,
        ));
    }
    let trig = [(2, 4), (3, 8), (4, 12), (5, 16), (6, 24), (8, 32)];
    for (i, (terms, max_freq)) in trig.into_iter().enumerate() {
        out.push(CorpusSpec::new(
            format!("trig_poly_{i}"),
            seed.wrapping_add(100 + i as u64),
            CorpusKind::TrigPoly { terms },
            max_freq,
        ));
    }
    for mode in [1usize, 4, 16] {
        out.push(CorpusSpec::new(
            format!("single_mode_{mode}"),
            seed,
            CorpusKind::SingleMode { mode },
            mode.max(2),
        ));
    }
    for max_freq in [8usize, 16, 32] {
        out.push(CorpusSpec::new(format!("step_like_{max_freq}"), seed, CorpusKind::StepLike, max_freq));
    }
    out
}

/// Hex SHA-256 of the little-endian sample bytes.
pub fn content_hash(field: &Field) -> String {
    let mut h = Sha256::new();
    for v in field.samples() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub spec: CorpusSpec,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub grid: TorusGrid,
    pub members: Vec<ManifestEntry>,
    /// Seconds since the Unix epoch; the only non-reproducible field.
    pub created_unix: u64,
}

impl CorpusManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn specs(&self) -> Vec<CorpusSpec> {
        self.members.iter().map(|m| m.spec.clone()).collect()
    }
}

/// Generates every spec, writes `<name>.tlab` files and `manifest.json` into `dir`.
pub fn write_corpus(specs: &[CorpusSpec], grid: &TorusGrid, dir: impl AsRef<Path>) -> Result<CorpusManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut members = Vec::with_capacity(specs.len());
    for spec in specs {
        let f = generate(spec, grid)?;
        let file = format!("{}.tlab", spec.name);
        crate::io::save_field(&f, dir.join(&file))?;
        members.push(ManifestEntry { spec: spec.clone(), file, sha256: content_hash(&f) });
    }
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = CorpusManifest { grid: *grid, members, created_unix };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
