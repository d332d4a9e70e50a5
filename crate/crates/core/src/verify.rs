//! Empirical checks of the norm equivalences, scaling laws and inclusions.
//!
//! Each check evaluates both sides of a relation on every corpus member and
//! summarizes the ratios as a band. With refinement enabled the same relation
//! is recomputed at `2N` on the same physical boxes and the shift of the band
//! is reported as drift.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::{BoxFamily, BoxSpec};
use crate::corpus::{generate, CorpusSpec};
use crate::error::{Error, Result};
use crate::extensions::{gradient_bound, ExtensionStack, SemigroupKind};
use crate::grid::{Field, TorusGrid};
use crate::norms::{
    besov_norm, bloch_cb_norm, bloch_hb_norm, campanato_norm, dagger_norm, frac_campanato_norm,
    h_alpha2_norm, inverse_space_norm, q_norm, scaled_h_norm, scaled_t_norm, star_norm,
    t_alpha2_norm, DaggerBox, LogTimeGrid, NormResult,
};
use crate::quadrature::TimeMesh;

/// Pass/fail limits. The defaults are engineering regressions, not constants
/// from the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub spread: f64,
    pub drift: f64,
    pub scaling: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { spread: 30.0, drift: 0.25, scaling: 0.05 }
    }
}

/// Which summary statistics a relation is judged on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// Spread and drift of the whole band.
    Spread,
    /// Only the upper end: a finite constant, stable under refinement.
    Constant,
    /// Reported without a verdict.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub function: String,
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub theorem: String,
    /// `left / right` in words.
    pub relation: String,
    pub alpha: f64,
    pub grid_n: usize,
    pub gate: Gate,
    pub entries: Vec<RatioEntry>,
    /// `(min, max)` of the ratios; `None` when some ratio is not positive and finite.
    pub band: Option<(f64, f64)>,
    pub spread: Option<f64>,
    pub refined_band: Option<(f64, f64)>,
    pub drift: Option<f64>,
    /// Constant members, listed by name.
    pub skipped: Vec<String>,
    pub note: Option<String>,
}

impl EquivalenceReport {
    fn new(theorem: &str, relation: &str, alpha: f64, grid_n: usize, gate: Gate) -> Self {
        Self {
            theorem: theorem.into(),
            relation: relation.into(),
            alpha,
            grid_n,
            gate,
            entries: Vec::new(),
            band: None,
            spread: None,
            refined_band: None,
            drift: None,
            skipped: Vec::new(),
            note: None,
        }
    }

    fn summarize(&mut self) {
        let ok = !self.entries.is_empty()
            && self.entries.iter().all(|e| e.ratio.is_finite() && e.ratio > 0.0);
        self.band = ok.then(|| band_of(&self.entries));
        self.spread = self.band.map(|(lo, hi)| hi / lo);
    }

    fn set_refined(&mut self, refined: &EquivalenceReport) {
        self.refined_band = refined.band;
        self.drift = match (self.band, refined.band) {
            (Some((lo, hi)), Some((lo2, hi2))) => Some(match self.gate {
                Gate::Constant => (hi2 / hi - 1.0).abs(),
                _ => (lo2 / lo - 1.0).abs().max((hi2 / hi - 1.0).abs()),
            }),
            _ => None,
        };
    }

    /// Reasons this report fails `th`; empty means pass. Ungated reports always pass.
    pub fn failures(&self, th: &Thresholds) -> Vec<String> {
        let mut out = Vec::new();
        if self.gate == Gate::Report {
            return out;
        }
        if self.band.is_none() {
            out.push("ratios not all positive and finite".into());
            return out;
        }
        if self.gate == Gate::Spread {
            if let Some(s) = self.spread.filter(|&s| s > th.spread) {
                out.push(format!("spread {s:.3} > {}", th.spread));
            }
        }
        if let Some(d) = self.drift.filter(|&d| d > th.drift || d.is_nan()) {
            out.push(format!("drift {d:.3} > {}", th.drift));
        }
        out
    }

    pub fn passes(&self, th: &Thresholds) -> bool {
        self.failures(th).is_empty()
    }
}

fn band_of(entries: &[RatioEntry]) -> (f64, f64) {
    entries.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.ratio), hi.max(e.ratio)))
}

/// Box family and refinement settings shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub boxes: BoxSpec,
    /// Recompute at `2N` and report drift.
    pub refine: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { boxes: BoxSpec::default(), refine: true }
    }
}

/// Everything a relation needs for one corpus member at one resolution.
pub struct Member<'a> {
    pub field: &'a Field,
    pub boxes: &'a BoxFamily,
    poisson: std::sync::OnceLock<ExtensionStack>,
    heat: std::sync::OnceLock<ExtensionStack>,
}

impl<'a> Member<'a> {
    fn new(field: &'a Field, boxes: &'a BoxFamily) -> Self {
        Self { field, boxes, poisson: Default::default(), heat: Default::default() }
    }

    /// Poisson extension on the default mesh reaching `L/2`.
    pub fn poisson(&self) -> &ExtensionStack {
        self.poisson.get_or_init(|| {
            let top = self.field.grid().period() / 2.0;
            let mesh = TimeMesh::with_defaults(top).expect("valid default mesh");
            ExtensionStack::build(self.field, SemigroupKind::Poisson, &mesh).expect("finite field")
        })
    }

    /// Heat extension on the default mesh reaching `L^2/4`.
    pub fn heat(&self) -> &ExtensionStack {
        self.heat.get_or_init(|| {
            let l = self.field.grid().period();
            let mesh = TimeMesh::with_defaults(l * l / 4.0).expect("valid default mesh");
            ExtensionStack::build(self.field, SemigroupKind::Heat, &mesh).expect("finite field")
        })
    }
}

type Pair = (f64, f64);
type Evaluator<'e> = dyn Fn(&Member) -> Result<Pair> + Sync + 'e;

/// One relation: its labels and how to compute `(left, right)`.
struct Relation<'e> {
    theorem: String,
    relation: String,
    alpha: f64,
    gate: Gate,
    eval: Box<Evaluator<'e>>,
}

fn relation<'e>(
    theorem: &str,
    relation: &str,
    alpha: f64,
    gate: Gate,
    eval: impl Fn(&Member) -> Result<Pair> + Sync + 'e,
) -> Relation<'e> {
    Relation { theorem: theorem.into(), relation: relation.into(), alpha, gate, eval: Box::new(eval) }
}

fn is_constant(f: &Field) -> bool {
    let (f0, mean) = f.without_mean();
    f0.max_abs() <= 1e-13 * mean.abs().max(1.0)
}

fn run_at(corpus: &[CorpusSpec], grid: &TorusGrid, boxes: &BoxFamily, rels: &[Relation]) -> Result<Vec<EquivalenceReport>> {
    let fields: Vec<(String, Field)> = corpus
        .iter()
        .map(|s| Ok((s.name.clone(), generate(s, grid)?)))
        .collect::<Result<_>>()?;
    let rows: Vec<Option<Vec<Pair>>> = fields
        .par_iter()
        .map(|(_, f)| {
            if is_constant(f) {
                return Ok(None);
            }
            let m = Member::new(f, boxes);
            rels.iter().map(|r| (r.eval)(&m)).collect::<Result<Vec<_>>>().map(Some)
        })
        .collect::<Result<_>>()?;
    let mut reports: Vec<EquivalenceReport> = rels
        .iter()
        .map(|r| EquivalenceReport::new(&r.theorem, &r.relation, r.alpha, grid.n(), r.gate))
        .collect();
    for ((name, _), row) in fields.iter().zip(rows) {
        match row {
            None => reports.iter_mut().for_each(|r| r.skipped.push(name.clone())),
            Some(pairs) => {
                for (rep, (left, right)) in reports.iter_mut().zip(pairs) {
                    rep.entries.push(RatioEntry { function: name.clone(), left, right, ratio: left / right });
                }
            }
        }
    }
    reports.iter_mut().for_each(EquivalenceReport::summarize);
    Ok(reports)
}

/// Explicit family at `grid` and the same physical boxes at `2N`.
fn families(grid: &TorusGrid, spec: BoxSpec) -> Result<(BoxFamily, Option<BoxFamily>)> {
    let coarse = BoxFamily::new(*grid, spec)?;
    let p = coarse.params();
    let fine_grid = grid.with_points(grid.n() * 2)?;
    let fine = BoxFamily::new(
        fine_grid,
        BoxSpec { j_min: p.j_min, j_max: Some(p.j_max), stride: Some(p.stride * 2) },
    )?;
    Ok((coarse, Some(fine)))
}

fn run(corpus: &[CorpusSpec], grid: &TorusGrid, opts: &CheckOptions, rels: &[Relation]) -> Result<Vec<EquivalenceReport>> {
    if corpus.is_empty() {
        return Err(Error::Empty("empty corpus".into()));
    }
    let (coarse, fine) = if opts.refine {
        families(grid, opts.boxes)?
    } else {
        (BoxFamily::new(*grid, opts.boxes)?, None)
    };
    let mut reports = run_at(corpus, grid, &coarse, rels)?;
    if let Some(fine) = fine {
        let refined = run_at(corpus, fine.grid(), &fine, rels)?;
        for (r, f) in reports.iter_mut().zip(&refined) {
            r.set_refined(f);
        }
    }
    Ok(reports)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > -1.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (-1, 1), got {alpha}")))
    }
}

fn v(r: Result<NormResult>) -> Result<f64> {
    r.map(|n| n.value)
}

/// `H^{alpha,2}` norm of the Poisson extension against the Campanato norm of the trace.
pub fn check_theorem_2_1(corpus: &[CorpusSpec], alpha: f64, grid: &TorusGrid, opts: &CheckOptions) -> Result<Vec<EquivalenceReport>> {
    check_alpha(alpha)?;
    let rels = [relation("2.1", "h_alpha2 / campanato", alpha, Gate::Spread, move |m| {
        Ok((v(h_alpha2_norm(m.poisson(), alpha, m.boxes))?, v(campanato_norm(m.field, alpha, m.boxes))?))
    })];
    run(corpus, grid, opts, &rels)
}

/// Scale-invariant harmonic norm against the fractional Campanato norm, the
/// star norm against the scale-invariant norm and, for `alpha` in `(0, 1)`,
/// the harmonic Bloch norm against the scale-invariant norm.
pub fn check_theorem_3_1(corpus: &[CorpusSpec], alpha: f64, grid: &TorusGrid, opts: &CheckOptions) -> Result<Vec<EquivalenceReport>> {
    check_alpha(alpha)?;
    let mut rels = vec![
        relation("3.1(i)", "scaled_h / frac_campanato", alpha, Gate::Spread, move |m| {
            Ok((v(scaled_h_norm(m.poisson(), alpha, m.boxes))?, v(frac_campanato_norm(m.field, alpha, m.boxes))?))
        }),
        relation("lemma 3.3", "star / scaled_h", alpha, Gate::Spread, move |m| {
            Ok((v(star_norm(m.poisson(), alpha, m.boxes))?, v(scaled_h_norm(m.poisson(), alpha, m.boxes))?))
        }),
    ];
    if alpha > 0.0 {
        rels.push(relation("3.1(ii)", "bloch_hb / scaled_h", alpha, Gate::Spread, move |m| {
            Ok((bloch_hb_norm(m.poisson())?, v(scaled_h_norm(m.poisson(), alpha, m.boxes))?))
        }));
    }
    run(corpus, grid, opts, &rels)
}

/// Heat analogues: `T^{alpha,2}` against Campanato, the scale-invariant heat
/// norm against fractional Campanato, the caloric Bloch norm for `alpha` in
/// `(0, 1)`, and both dagger variants (reported only).
pub fn check_theorem_4_1(corpus: &[CorpusSpec], alpha: f64, grid: &TorusGrid, opts: &CheckOptions) -> Result<Vec<EquivalenceReport>> {
    check_alpha(alpha)?;
    let mut rels = vec![
        relation("4.1(i)", "t_alpha2 / campanato", alpha, Gate::Spread, move |m| {
            Ok((v(t_alpha2_norm(m.heat(), alpha, m.boxes))?, v(campanato_norm(m.field, alpha, m.boxes))?))
        }),
        relation("4.1(ii)", "scaled_t / frac_campanato", alpha, Gate::Spread, move |m| {
            Ok((v(scaled_t_norm(m.heat(), alpha, m.boxes))?, v(frac_campanato_norm(m.field, alpha, m.boxes))?))
        }),
    ];
    if alpha > 0.0 {
        rels.push(relation("4.1(iii)", "bloch_cb / scaled_t", alpha, Gate::Spread, move |m| {
            Ok((bloch_cb_norm(m.heat())?, v(scaled_t_norm(m.heat(), alpha, m.boxes))?))
        }));
    }
    for (variant, name) in [(DaggerBox::Linear, "dagger_linear / scaled_t"), (DaggerBox::Parabolic, "dagger_parabolic / scaled_t")] {
        rels.push(relation("4.1(ii)", name, alpha, Gate::Report, move |m| {
            Ok((v(dagger_norm(m.heat(), alpha, m.boxes, variant))?, v(scaled_t_norm(m.heat(), alpha, m.boxes))?))
        }));
    }
    run(corpus, grid, opts, &rels)
}

/// For `alpha` in `(0, 1)`: inverse-space norm with `T = infinity` against the
/// Besov norm. For `alpha` in `(-1, 0)`: fractional Campanato against the Q
/// norm with exponent `-alpha`. At `alpha = 0` both sides are BMO and the check
/// is refused.
pub fn check_theorem_4_2(corpus: &[CorpusSpec], alpha: f64, grid: &TorusGrid, opts: &CheckOptions) -> Result<Vec<EquivalenceReport>> {
    check_alpha(alpha)?;
    let rels = if alpha > 0.0 {
        let tg = LogTimeGrid::for_period(grid.period());
        vec![relation("4.2(ii)", "inverse_space / besov", alpha, Gate::Spread, move |m| {
            Ok((v(inverse_space_norm(m.field, alpha, f64::INFINITY, m.boxes))?, besov_norm(m.field, &tg)?))
        })]
    } else if alpha < 0.0 {
        vec![relation("4.2(i)", "frac_campanato / q", alpha, Gate::Spread, move |m| {
            Ok((v(frac_campanato_norm(m.field, alpha, m.boxes))?, v(q_norm(m.field, -alpha, m.boxes))?))
        })]
    } else {
        return Err(Error::Domain(
            "alpha = 0: both branches collapse to BMO; nothing to compare".into(),
        ));
    };
    run(corpus, grid, opts, &rels)
}

/// Empirical gradient constant `sup t^{1-alpha} |grad u| / ||u||_{H^{alpha,2}}`.
pub fn check_lemma_2_2(corpus: &[CorpusSpec], alpha: f64, grid: &TorusGrid, opts: &CheckOptions) -> Result<Vec<EquivalenceReport>> {
    check_alpha(alpha)?;
    let rels = [relation("lemma 2.2(i)", "gradient_bound / h_alpha2", alpha, Gate::Constant, move |m| {
        Ok((gradient_bound(m.poisson(), alpha), v(h_alpha2_norm(m.poisson(), alpha, m.boxes))?))
    })];
    run(corpus, grid, opts, &rels)
}

/// Per-box comparison of scale-invariant harmonic norms at two exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub beta: f64,
    pub alpha: f64,
    pub boxes_compared: usize,
    /// Largest `value_alpha / value_beta` over boxes with positive values;
    /// the weight inequality demands at most 1.
    pub max_ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub beta: f64,
    pub chains: Vec<EquivalenceReport>,
    pub monotone: Vec<MonotoneCheck>,
}

/// Each inclusion `A in B` is the ratio `norm_B / norm_A`, which must stay
/// bounded. The monotone weight inequality `value_alpha <= value_beta` for
/// `beta < alpha` is checked box by box on the unit-scale family.
pub fn check_inclusions(corpus: &[CorpusSpec], beta: f64, grid: &TorusGrid, opts: &CheckOptions) -> Result<InclusionReport> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    let rels = vec![
        relation("lemma 3.1(iii)", "campanato(0) / frac_campanato(-beta)", beta, Gate::Constant, move |m| {
            Ok((v(campanato_norm(m.field, 0.0, m.boxes))?, v(frac_campanato_norm(m.field, -beta, m.boxes))?))
        }),
        relation("lemma 3.1(iii)", "frac_campanato(beta) / campanato(0)", beta, Gate::Constant, move |m| {
            Ok((v(frac_campanato_norm(m.field, beta, m.boxes))?, v(campanato_norm(m.field, 0.0, m.boxes))?))
        }),
        relation("lemma 3.2(iii)", "scaled_h(0) / scaled_h(-beta)", beta, Gate::Constant, move |m| {
            Ok((v(scaled_h_norm(m.poisson(), 0.0, m.boxes))?, v(scaled_h_norm(m.poisson(), -beta, m.boxes))?))
        }),
        relation("lemma 3.2(iii)", "scaled_h(beta) / scaled_h(0)", beta, Gate::Constant, move |m| {
            Ok((v(scaled_h_norm(m.poisson(), beta, m.boxes))?, v(scaled_h_norm(m.poisson(), 0.0, m.boxes))?))
        }),
        relation("heat chain", "scaled_t(0) / scaled_t(-beta)", beta, Gate::Constant, move |m| {
            Ok((v(scaled_t_norm(m.heat(), 0.0, m.boxes))?, v(scaled_t_norm(m.heat(), -beta, m.boxes))?))
        }),
        relation("heat chain", "scaled_t(beta) / scaled_t(0)", beta, Gate::Constant, move |m| {
            Ok((v(scaled_t_norm(m.heat(), beta, m.boxes))?, v(scaled_t_norm(m.heat(), 0.0, m.boxes))?))
        }),
    ];
    let chains = run(corpus, grid, opts, &rels)?;

    let boxes = BoxFamily::new(*grid, opts.boxes)?;
    let pairs = [(-beta, 0.0), (0.0, beta), (-beta, beta)];
    let mut monotone = Vec::new();
    for (lo, hi) in pairs {
        let mut compared = 0;
        let mut max_ratio: f64 = 0.0;
        for spec in corpus {
            let f = generate(spec, grid)?;
            if is_constant(&f) {
                continue;
            }
            let m = Member::new(&f, &boxes);
            let a = scaled_h_norm(m.poisson(), hi, &boxes)?;
            let b = scaled_h_norm(m.poisson(), lo, &boxes)?;
            let (Some(pa), Some(pb)) = (a.per_box, b.per_box) else {
                return Err(Error::Precondition("box family too large for per-box comparison".into()));
            };
            for (x, y) in pa.iter().zip(&pb) {
                if y.value > 0.0 {
                    compared += 1;
                    max_ratio = max_ratio.max(x.value / y.value);
                }
            }
        }
        monotone.push(MonotoneCheck {
            beta: lo,
            alpha: hi,
            boxes_compared: compared,
            max_ratio,
            holds: compared > 0 && max_ratio <= 1.0 + 1e-12,
        });
    }
    Ok(InclusionReport { beta, chains, monotone })
}

/// Norms with a known behavior under dilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingNorm {
    Campanato,
    FracCampanato,
    ScaledH,
    InverseSpace,
    HAlpha2,
}

impl ScalingNorm {
    pub const ALL: [ScalingNorm; 5] = [
        ScalingNorm::Campanato,
        ScalingNorm::FracCampanato,
        ScalingNorm::ScaledH,
        ScalingNorm::InverseSpace,
        ScalingNorm::HAlpha2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScalingNorm::Campanato => "campanato",
            ScalingNorm::FracCampanato => "frac_campanato",
            ScalingNorm::ScaledH => "scaled_h",
            ScalingNorm::InverseSpace => "inverse_space",
            ScalingNorm::HAlpha2 => "h_alpha2",
        }
    }

    /// Candidate exponents with their source. The first one is the gate;
    /// `h_alpha2` has two candidates and is not gated.
    pub fn expected(self, alpha: f64) -> Vec<(f64, &'static str)> {
        match self {
            ScalingNorm::Campanato => vec![(alpha, "campanato dilation law")],
            ScalingNorm::FracCampanato => vec![(0.0, "scale invariance")],
            ScalingNorm::ScaledH => vec![(0.0, "scale invariance")],
            ScalingNorm::InverseSpace => vec![(0.0, "invariance under f -> lambda f(lambda x)")],
            ScalingNorm::HAlpha2 => vec![
                (alpha, "change of variables on the displayed norm"),
                (2.0 * (alpha - 1.0), "stated exponent 2(alpha - 1)"),
            ],
        }
    }

    pub fn gated(self) -> bool {
        self != ScalingNorm::HAlpha2
    }
}

/// How `f(lambda x)` is realized on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dilation {
    /// `f[lambda i mod N]`: exact for periodic functions, which repeat `lambda` times.
    Periodic,
    /// `f[c + lambda (i - c)]` inside the window `|lambda (i - c)| < N/2` around the
    /// center `c = N/2`, zero outside. `f` must vanish, to `1e-10` relative,
    /// outside the window of half-width `N / (2 lambda)`.
    Localized,
}

/// Lattice-exact dilation `x -> lambda x`, optionally multiplied by `lambda`.
pub fn dilate(f: &Field, lambda: usize, mode: Dilation) -> Result<Field> {
    let g = *f.grid();
    if lambda == 0 {
        return Err(Error::Domain("lambda must be a positive integer".into()));
    }
    let n = g.n() as i64;
    let lam = lambda as i64;
    let s = f.samples();
    let dims = g.dims();
    let samples: Vec<f64> = match mode {
        Dilation::Periodic => (0..g.len())
            .map(|i| {
                let c = g.coords(i);
                let idx: Vec<i64> = (0..dims).map(|a| lam * c[a] as i64 % n).collect();
                s[g.index(&idx)]
            })
            .collect(),
        Dilation::Localized => {
            let half = n / 2;
            let peak = f.max_abs();
            for (i, &x) in s.iter().enumerate() {
                let c = g.coords(i);
                let inside = (0..dims).all(|a| lam * (c[a] as i64 - half).abs() < half);
                if !inside && x.abs() > 1e-10 * peak {
                    return Err(Error::Precondition(
                        "function is not localized inside the dilation window".into(),
                    ));
                }
            }
            (0..g.len())
                .map(|i| {
                    let c = g.coords(i);
                    let d: Vec<i64> = (0..dims).map(|a| c[a] as i64 - half).collect();
                    if d.iter().all(|&x| (lam * x).abs() < half) {
                        let idx: Vec<i64> = d.iter().map(|&x| half + lam * x).collect();
                        s[g.index(&idx)]
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    Field::new(g, samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub norm: ScalingNorm,
    pub alpha: f64,
    pub lambda: usize,
    pub dilation: Dilation,
    pub value: f64,
    pub value_scaled: f64,
    /// `log_lambda(value_scaled / value)`.
    pub measured_exponent: f64,
    /// Candidate exponents with their source.
    pub expected: Vec<(f64, String)>,
    pub gated: bool,
}

impl ScalingReport {
    /// Distance to the first expected exponent.
    pub fn error(&self) -> f64 {
        (self.measured_exponent - self.expected[0].0).abs()
    }

    pub fn passes(&self, th: &Thresholds) -> bool {
        !self.gated || (self.measured_exponent.is_finite() && self.error() <= th.scaling)
    }
}

fn scaling_value(norm: ScalingNorm, f: &Field, alpha: f64, boxes: &BoxFamily) -> Result<f64> {
    let g = f.grid();
    let poisson = || {
        let mesh = TimeMesh::with_defaults(g.period() / 2.0)?;
        ExtensionStack::build(f, SemigroupKind::Poisson, &mesh)
    };
    match norm {
        ScalingNorm::Campanato => v(campanato_norm(f, alpha, boxes)),
        ScalingNorm::FracCampanato => v(frac_campanato_norm(f, alpha, boxes)),
        ScalingNorm::ScaledH => v(scaled_h_norm(&poisson()?, alpha, boxes)),
        ScalingNorm::InverseSpace => v(inverse_space_norm(f, alpha, f64::INFINITY, boxes)),
        ScalingNorm::HAlpha2 => v(h_alpha2_norm(&poisson()?, alpha, boxes)),
    }
}

/// Measures `log_lambda(norm(f_lambda) / norm(f))` with `f_lambda = f(lambda x)`,
/// or `lambda f(lambda x)` for the inverse-space norm.
pub fn check_scaling(
    f: &Field,
    norm: ScalingNorm,
    alpha: f64,
    lambda: usize,
    mode: Dilation,
    boxes: &BoxFamily,
) -> Result<ScalingReport> {
    check_alpha(alpha)?;
    let mut fl = dilate(f, lambda, mode)?;
    if norm == ScalingNorm::InverseSpace {
        fl = fl.scaled(lambda as f64);
    }
    let value = scaling_value(norm, f, alpha, boxes)?;
    let value_scaled = scaling_value(norm, &fl, alpha, boxes)?;
    if !(value > 0.0) {
        return Err(Error::UndefinedRatio(format!("{} norm of the input vanishes", norm.name())));
    }
    let measured_exponent = if lambda == 1 { 0.0 } else { (value_scaled / value).ln() / (lambda as f64).ln() };
    Ok(ScalingReport {
        norm,
        alpha,
        lambda,
        dilation: mode,
        value,
        value_scaled,
        measured_exponent,
        expected: norm.expected(alpha).into_iter().map(|(e, s)| (e, s.to_string())).collect(),
        gated: norm.gated(),
    })
}

/// One CSV line per report: theorem, relation, alpha, spread, drift.
pub fn summary_csv(reports: &[EquivalenceReport]) -> String {
    let mut out = String::from("theorem,relation,alpha,grid_n,band_min,band_max,spread,drift\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.theorem,
            r.relation,
            r.alpha,
            r.grid_n,
            opt(r.band.map(|b| b.0)),
            opt(r.band.map(|b| b.1)),
            opt(r.spread),
            opt(r.drift)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusKind;

    #[test]
    fn periodic_dilation_doubles_frequency() {
        let g = TorusGrid::unit(1, 16).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
        let d = dilate(&f, 2, Dilation::Periodic).unwrap();
        let e = Field::from_fn(g, |x| (4.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
        assert!(d.max_abs_diff(&e) < 1e-14);
        assert_eq!(dilate(&f, 1, Dilation::Periodic).unwrap(), f);
    }

    #[test]
    fn localized_dilation_rejects_spread_out_input() {
        let g = TorusGrid::unit(1, 16).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
        assert!(dilate(&f, 2, Dilation::Localized).is_err());
    }

    #[test]
    fn constant_member_is_skipped_and_listed() {
        let g = TorusGrid::unit(1, 32).unwrap();
        let mut zero = CorpusSpec::new("zero", 1, CorpusKind::SingleMode { mode: 1 }, 4);
        zero.amplitude = 0.0;
        let one = CorpusSpec::new("mode", 1, CorpusKind::SingleMode { mode: 2 }, 4);
        let opts = CheckOptions { boxes: BoxSpec::default(), refine: false };
        let r = check_theorem_2_1(&[zero, one], 0.0, &g, &opts).unwrap();
        assert_eq!(r[0].skipped, vec!["zero".to_string()]);
        assert_eq!(r[0].entries.len(), 1);
        assert_eq!(r[0].spread, Some(1.0));
    }

    #[test]
    fn theorem_4_2_refuses_alpha_zero() {
        let g = TorusGrid::unit(1, 32).unwrap();
        let one = CorpusSpec::new("mode", 1, CorpusKind::SingleMode { mode: 2 }, 4);
        let opts = CheckOptions { boxes: BoxSpec::default(), refine: false };
        assert!(matches!(check_theorem_4_2(&[one], 0.0, &g, &opts), Err(Error::Domain(_))));
    }

    #[test]
    fn spread_threshold_one_fails_for_distinct_ratios() {
        let mut r = EquivalenceReport::new("x", "a / b", 0.0, 8, Gate::Spread);
        for (i, ratio) in [1.0, 2.0].into_iter().enumerate() {
            r.entries.push(RatioEntry { function: i.to_string(), left: ratio, right: 1.0, ratio });
        }
        r.summarize();
        assert_eq!(r.spread, Some(2.0));
        assert!(!r.passes(&Thresholds { spread: 1.0, ..Default::default() }));
        assert!(r.passes(&Thresholds::default()));
    }
}
