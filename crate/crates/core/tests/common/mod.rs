//! Independent oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tlab::grid::{Field, TorusGrid};
use tlab::norms::{campanato_norm, campanato_pair_norm, q_norm, NormResult};
use tlab::spectral::{
    extension_time_derivative, forward_transform, frac_laplacian_power, heat_semigroup, inverse_transform,
    leray_project, poisson_semigroup, riesz_transform, spectral_gradient, SemigroupKind,
};
use tlab::{BoxFamily, BoxSpec, SpectralField};

pub fn white_noise(grid: TorusGrid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field::new(grid, s).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `|got - want|_inf / max(|want|_inf, scale)`.
fn rel(got: &Field, want: &[f64], scale: f64) -> f64 {
    max_diff(got.samples(), want) / max_abs(want).max(scale)
}

/// Physical phase `2 pi k.x / L + phi` at every lattice point.
fn phases(g: &TorusGrid, k: [i64; 3], phi: f64) -> Vec<f64> {
    let l = g.period();
    (0..g.len())
        .map(|i| {
            let x = g.position(i);
            2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]) / l + phi
        })
        .collect()
}

fn test_grids() -> Vec<TorusGrid> {
    vec![
        TorusGrid::unit(1, 64).unwrap(),
        TorusGrid::new(2, 32, 3.0).unwrap(),
        TorusGrid::new(3, 16, 2.0 * PI).unwrap(),
    ]
}

fn test_modes(dims: usize) -> Vec<[i64; 3]> {
    match dims {
        1 => vec![[1, 0, 0], [-3, 0, 0], [17, 0, 0], [31, 0, 0]],
        2 => vec![[1, 0, 0], [0, -2, 0], [3, 4, 0], [-7, 15, 0]],
        _ => vec![[1, 0, 0], [0, 0, 1], [1, -2, 3], [-7, 5, 6]],
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MultiplierErrors {
    /// Worst relative error of any operator on a single mode.
    pub symbols: f64,
    /// Worst relative error of the composition laws on white noise.
    pub composition: f64,
}

/// Applies every multiplier to `cos(2 pi k.x / L + phi)` and compares with the
/// closed form computed in physical space.
pub fn multiplier_errors() -> MultiplierErrors {
    let mut symbols = 0.0f64;
    let mut composition = 0.0f64;
    for g in test_grids() {
        let l = g.period();
        let dims = g.dims();
        for k in test_modes(dims) {
            let th = phases(&g, k, 0.3);
            let cos: Vec<f64> = th.iter().map(|t| t.cos()).collect();
            let sin: Vec<f64> = th.iter().map(|t| t.sin()).collect();
            let f = Field::new(g, cos.clone()).unwrap();
            let fh = forward_transform(&f).unwrap();
            let kn = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
            let w = 2.0 * PI * kn / l;
            let scaled = |c: f64, v: &[f64]| v.iter().map(|x| c * x).collect::<Vec<_>>();

            // Times in units of the decay time keep the expected amplitude O(1).
            for t in [0.0, 0.1 / w, 2.0 / w] {
                let got = inverse_transform(&poisson_semigroup(&fh, t).unwrap());
                symbols = symbols.max(rel(&got, &scaled((-w * t).exp(), &cos), 1e-300));
            }
            for t in [0.0, 0.1 / (w * w), 2.0 / (w * w)] {
                let got = inverse_transform(&heat_semigroup(&fh, t).unwrap());
                symbols = symbols.max(rel(&got, &scaled((-w * w * t).exp(), &cos), 1e-300));
            }
            for (kind, lam) in [(SemigroupKind::Poisson, w), (SemigroupKind::Heat, w * w)] {
                let t = 0.05 / lam;
                let got = inverse_transform(&extension_time_derivative(&fh, t, kind).unwrap());
                symbols = symbols.max(rel(&got, &scaled(-lam * (-lam * t).exp(), &cos), 1e-300));
            }
            for s in [-0.75, -0.3, 0.4, 0.9] {
                let got = inverse_transform(&frac_laplacian_power(&fh, s).unwrap());
                symbols = symbols.max(rel(&got, &scaled(w.powf(s), &cos), 1e-300));
            }
            let grads = spectral_gradient(&fh);
            for axis in 0..dims {
                let want = scaled(-2.0 * PI * k[axis] as f64 / l, &sin);
                symbols = symbols.max(rel(&inverse_transform(&grads[axis]), &want, w));
                let want = scaled(-(k[axis] as f64) / kn, &sin);
                let got = inverse_transform(&riesz_transform(&fh, axis).unwrap());
                symbols = symbols.max(rel(&got, &want, 1.0));
            }
            // Leray on a cos(theta) with a fixed amplitude vector a.
            let a = [0.7, -1.3, 0.4];
            let comps: Vec<SpectralField> =
                (0..dims).map(|j| forward_transform(&Field::new(g, scaled(a[j], &cos)).unwrap()).unwrap()).collect();
            let ka: f64 = (0..dims).map(|j| k[j] as f64 * a[j]).sum();
            let out = leray_project(&comps).unwrap();
            for j in 0..dims {
                let want = scaled(a[j] - k[j] as f64 * ka / (kn * kn), &cos);
                symbols = symbols.max(rel(&inverse_transform(&out[j]), &want, 1.0));
            }
            let div = inverse_transform(&tlab::spectral::divergence(&out).unwrap());
            symbols = symbols.max(max_abs(div.samples()) / w);
        }

        // Composition laws on white noise.
        let (f0, _) = white_noise(g, 11).without_mean();
        let fh = forward_transform(&f0).unwrap();
        let scale = max_abs(f0.samples());
        let cmp = |a: &SpectralField, b: &SpectralField| {
            max_diff(inverse_transform(a).samples(), inverse_transform(b).samples()) / scale
        };
        let (t, s) = (0.013 * l, 0.029 * l);
        let pp = poisson_semigroup(&poisson_semigroup(&fh, t).unwrap(), s).unwrap();
        composition = composition.max(cmp(&pp, &poisson_semigroup(&fh, t + s).unwrap()));
        let (t, s) = (1.3e-4 * l * l, 2.9e-4 * l * l);
        let hh = heat_semigroup(&heat_semigroup(&fh, t).unwrap(), s).unwrap();
        composition = composition.max(cmp(&hh, &heat_semigroup(&fh, t + s).unwrap()));
        for s in [-0.6, -0.25, 0.35, 0.8] {
            let there = frac_laplacian_power(&fh, s).unwrap();
            let back = frac_laplacian_power(&there, -s).unwrap();
            composition = composition.max(cmp(&back, &fh));
        }
        let two = frac_laplacian_power(&frac_laplacian_power(&fh, 0.3).unwrap(), 0.45).unwrap();
        composition = composition.max(cmp(&two, &frac_laplacian_power(&fh, 0.75).unwrap()));
        // Leray: idempotent, kills gradients, divergence-free output.
        let v: Vec<SpectralField> =
            (0..g.dims()).map(|j| forward_transform(&white_noise(g, 40 + j as u64)).unwrap()).collect();
        let p1 = leray_project(&v).unwrap();
        let p2 = leray_project(&p1).unwrap();
        for j in 0..g.dims() {
            composition = composition.max(cmp(&p2[j], &p1[j]));
        }
        let div = inverse_transform(&tlab::spectral::divergence(&p1).unwrap());
        let kmax = 2.0 * PI * g.n() as f64 / l;
        composition = composition.max(max_abs(div.samples()) / (kmax * scale));
        let grad = leray_project(&spectral_gradient(&fh)).unwrap();
        for c in &grad {
            composition = composition.max(max_abs(inverse_transform(c).samples()) / (kmax * scale));
        }
    }
    MultiplierErrors { symbols, composition }
}

/// Ball weights rebuilt from scratch: every integer offset `o` in the cube
/// `[-m, m]^n` with `|o| < m` counts 1, `|o| = m` counts 1/2, and offsets that
/// land on the same lattice point add up.
pub fn brute_ball(g: &TorusGrid, center: usize, m: usize) -> Vec<(usize, f64)> {
    let n = g.n() as i64;
    let dims = g.dims();
    let c = g.coords(center);
    let m = m as i64;
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    let range: Vec<i64> = (-m..=m).collect();
    let mut offsets: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dims {
        offsets = offsets
            .into_iter()
            .flat_map(|o| range.iter().map(move |&r| [o.clone(), vec![r]].concat()))
            .collect();
    }
    for o in offsets {
        let r2: i64 = o.iter().map(|v| v * v).sum();
        let w = if r2 < m * m {
            1.0
        } else if r2 == m * m {
            0.5
        } else {
            continue;
        };
        let idx: Vec<i64> = (0..dims).map(|a| (c[a] as i64 + o[a]).rem_euclid(n)).collect();
        *acc.entry(g.index(&idx)).or_insert(0.0) += w;
    }
    acc.into_iter().collect()
}

fn min_image_dist(g: &TorusGrid, a: usize, b: usize) -> f64 {
    let (ca, cb) = (g.coords(a), g.coords(b));
    let n = g.n() as i64;
    let h = g.spacing();
    (0..g.dims())
        .map(|ax| {
            let d = (ca[ax] as i64 - cb[ax] as i64).rem_euclid(n);
            let d = d.min(n - d) as f64 * h;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleNorm {
    Campanato,
    Pair,
    Q,
}

/// Squared per-box value by explicit loops over the ball.
pub fn brute_box(f: &Field, norm: OracleNorm, alpha: f64, center: usize, j: u32) -> f64 {
    let g = f.grid();
    let n = g.dims() as f64;
    let cell = g.spacing().powi(g.dims() as i32);
    let m = g.n() >> j;
    let r = g.period() / 2f64.powi(j as i32);
    let ball = brute_ball(g, center, m);
    let s = f.samples();
    match norm {
        OracleNorm::Campanato => {
            let w: f64 = ball.iter().map(|p| p.1).sum();
            let mean = ball.iter().map(|&(i, wi)| wi * s[i]).sum::<f64>() / w;
            let dev: f64 = ball.iter().map(|&(i, wi)| wi * (s[i] - mean).powi(2)).sum();
            cell * r.powf(-(n + 2.0 * alpha)) * dev
        }
        OracleNorm::Pair => {
            let mut sum = 0.0;
            for &(y, wy) in &ball {
                for &(z, wz) in &ball {
                    sum += wy * wz * (s[y] - s[z]).powi(2);
                }
            }
            cell * cell * r.powf(-2.0 * (alpha + n)) * sum
        }
        OracleNorm::Q => {
            let mut sum = 0.0;
            for &(y, wy) in &ball {
                for &(z, wz) in &ball {
                    if y != z {
                        let d = min_image_dist(g, y, z);
                        sum += wy * wz * (s[y] - s[z]).powi(2) * d.powf(-(n + 2.0 * alpha));
                    }
                }
            }
            cell * cell * r.powf(2.0 * alpha - n) * sum
        }
    }
}

/// Worst relative discrepancy, over every box of the full family, between the
/// library table and the brute-force loops.
pub fn oracle_discrepancy(f: &Field, norm: OracleNorm, alpha: f64) -> f64 {
    let g = *f.grid();
    let boxes = BoxFamily::new(g, BoxSpec::full()).unwrap();
    let res: NormResult = match norm {
        OracleNorm::Campanato => campanato_norm(f, alpha, &boxes),
        OracleNorm::Pair => campanato_pair_norm(f, alpha, &boxes),
        OracleNorm::Q => q_norm(f, alpha, &boxes),
    }
    .unwrap();
    let table = res.per_box.as_ref().expect("small families keep their table");
    let levels = g.n().trailing_zeros();
    assert_eq!(table.len(), g.len() * levels as usize);
    let mut worst_box = 0.0f64;
    let mut best = 0.0f64;
    for b in table {
        let want = brute_box(f, norm, alpha, b.center_index, b.j).sqrt();
        best = best.max(want);
        worst_box = worst_box.max((b.value - want).abs());
    }
    let value_err = (res.value - best).abs() / best;
    (worst_box / best).max(value_err)
}

/// Grids and exponents of the oracle comparison: all `N <= 16`, one and two dimensions.
pub fn oracle_cases() -> Vec<(TorusGrid, OracleNorm, f64)> {
    let mut out = Vec::new();
    for g in [
        TorusGrid::unit(1, 8).unwrap(),
        TorusGrid::new(1, 16, 2.5).unwrap(),
        TorusGrid::unit(2, 8).unwrap(),
        TorusGrid::unit(2, 16).unwrap(),
    ] {
        for a in [-0.5, 0.0, 0.5] {
            out.push((g, OracleNorm::Campanato, a));
            out.push((g, OracleNorm::Pair, a));
        }
        for b in [0.25, 0.5, 0.75] {
            out.push((g, OracleNorm::Q, b));
        }
    }
    out
}

pub fn worst_oracle_discrepancy() -> f64 {
    oracle_cases()
        .into_iter()
        .enumerate()
        .map(|(i, (g, norm, a))| oracle_discrepancy(&white_noise(g, 100 + i as u64), norm, a))
        .fold(0.0, f64::max)
}

/// Band-limited random divergence-free field with `max |u| = amplitude`.
pub fn ns_shape(grid: TorusGrid, amplitude: f64, seed: u64) -> tlab::ns3d::VelocityField {
    use tlab::corpus::{generate, CorpusKind, CorpusSpec};
    let comps: Vec<Field> = (0..3)
        .map(|j| {
            let spec = CorpusSpec::new("u", seed + j, CorpusKind::FracNoise { decay: 1.0 }, 2);
            generate(&spec, &grid).unwrap()
        })
        .collect();
    let v = tlab::ns3d::make_divergence_free([comps[0].clone(), comps[1].clone(), comps[2].clone()]).unwrap();
    let m = v.max_magnitude();
    v.scaled(amplitude / m)
}

#[derive(Debug, Clone, Copy)]
pub struct NsChecks {
    /// Relative L2 distance of the Picard and IF-RK4 end states, Taylor-Green data.
    pub picard_vs_rk4: f64,
    /// Worst divergence ratio over every stored state.
    pub divergence: f64,
    /// Largest energy increase between consecutive stored states, relative to the initial energy.
    pub energy_increase: f64,
    /// Relative L2 distance between the solution for dilated data and the dilated solution.
    pub scaling: f64,
}

pub fn ns_checks() -> NsChecks {
    use tlab::ns3d::{mild_solve_picard, step_ifrk4, taylor_green, IfRk4Options, PicardOptions};
    let g = TorusGrid::unit(3, 32).unwrap();
    let t = 0.1;
    let tg = taylor_green(g, 0.05).unwrap();
    let picard = mild_solve_picard(&tg, t, &PicardOptions::default()).unwrap();
    assert!(picard.config.converged);
    let rk4 = step_ifrk4(&tg, t, 100, &IfRk4Options::default()).unwrap();
    let picard_vs_rk4 = picard.last().relative_l2_distance(rk4.last());

    let a = ns_shape(g, 1.0, 21);
    let generic = mild_solve_picard(&a, t, &PicardOptions::default()).unwrap();
    assert!(generic.config.converged);
    let generic_rk4 = step_ifrk4(&a, t, 200, &IfRk4Options::default()).unwrap();
    let mut divergence = 0.0f64;
    let mut energy_increase = f64::NEG_INFINITY;
    for tr in [&picard, &rk4, &generic, &generic_rk4] {
        divergence = divergence.max(tr.initial.divergence_ratio());
        for s in &tr.states {
            divergence = divergence.max(s.divergence_ratio());
        }
        let mut e = vec![tr.initial.energy()];
        e.extend(tr.energies());
        for w in e.windows(2) {
            energy_increase = energy_increase.max((w[1] - w[0]) / e[0]);
        }
    }

    let u = step_ifrk4(&a, t, 200, &IfRk4Options { record_every: 200, nonlinear: true }).unwrap();
    let ul = step_ifrk4(&a.dilated(), t / 4.0, 200, &IfRk4Options { record_every: 200, nonlinear: true }).unwrap();
    let scaling = ul.last().relative_l2_distance(&u.last().dilated());
    NsChecks { picard_vs_rk4, divergence, energy_increase, scaling }
}
