//! The four commands. Each returns `Ok(true)` when every threshold holds,
//! `Ok(false)` when some threshold fails and `Err` on any other problem.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use tlab::corpus::{default_corpus, generate, write_corpus, CorpusKind, CorpusManifest, CorpusSpec};
use tlab::norms::{self, LogTimeGrid, NormResult};
use tlab::ns3d::{inflation_probe, smalldata_probe, InflationConfig, InflationReport, SmallDataConfig, SmallDataReport};
use tlab::verify::{self, CheckOptions, Dilation, EquivalenceReport, InclusionReport, ScalingNorm, ScalingReport};
use tlab::{BoxFamily, ExtensionStack, Field, SemigroupKind, TimeMesh, TorusGrid};

use crate::config::{Probe, RunConfig};

pub type Outcome = Result<bool, String>;

pub const ALL_CHECKS: [&str; 7] = ["2.1", "3.1", "4.1", "4.2", "2.2", "scaling", "inclusions"];

pub const NORMS: [&str; 15] = [
    "campanato",
    "campanato_pair",
    "q",
    "frac_campanato",
    "h_alpha2",
    "scaled_h",
    "star",
    "t_alpha2",
    "scaled_t",
    "dagger_linear",
    "dagger_parabolic",
    "inverse_space",
    "bloch_hb",
    "bloch_cb",
    "besov",
];

const VERIFY_ALPHAS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), String> {
    write_file(dir, name, &(serde_json::to_string_pretty(value).map_err(err)? + "\n"))
}

fn save_config(cfg: &RunConfig) -> Result<(), String> {
    write_file(&cfg.out, "config.json", &(cfg.to_json() + "\n"))
}

fn grid_for(cfg: &RunConfig, default_n: usize) -> Result<TorusGrid, String> {
    TorusGrid::new(cfg.dims, cfg.grid_n.unwrap_or(default_n), cfg.period).map_err(err)
}

/// Corpus specs and, when they came from a manifest, its grid.
fn corpus(cfg: &RunConfig) -> Result<(Vec<CorpusSpec>, Option<TorusGrid>), String> {
    match &cfg.corpus {
        Some(path) => {
            let m = CorpusManifest::load(path).map_err(|e| format!("cannot load corpus {}: {e}", path.display()))?;
            Ok((m.specs(), Some(m.grid)))
        }
        None => Ok((default_corpus(cfg.seed), None)),
    }
}

/// The manifest grid unless the grid was set explicitly.
fn corpus_grid(cfg: &RunConfig, from_manifest: Option<TorusGrid>, default_n: usize) -> Result<TorusGrid, String> {
    match from_manifest {
        Some(g) if cfg.grid_n.is_none() => Ok(g),
        _ => grid_for(cfg, default_n),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn cmd_corpus(cfg: &RunConfig) -> Outcome {
    let grid = grid_for(cfg, 256)?;
    let specs = match &cfg.corpus {
        Some(_) => corpus(cfg)?.0,
        None => default_corpus(cfg.seed),
    };
    let manifest = write_corpus(&specs, &grid, &cfg.out).map_err(err)?;
    save_config(cfg)?;
    println!("wrote {} fields to {}", manifest.members.len(), cfg.out.display());
    Ok(true)
}

#[derive(Debug, Serialize)]
struct NormOutput {
    norm: String,
    alpha: f64,
    input: String,
    value: f64,
    /// Box-level detail; absent for the supremum norms.
    result: Option<NormResult>,
}

fn poisson(f: &Field) -> tlab::Result<ExtensionStack> {
    let mesh = TimeMesh::with_defaults(f.grid().period() / 2.0)?;
    ExtensionStack::build(f, SemigroupKind::Poisson, &mesh)
}

fn heat(f: &Field) -> tlab::Result<ExtensionStack> {
    let l = f.grid().period();
    let mesh = TimeMesh::with_defaults(l * l / 4.0)?;
    ExtensionStack::build(f, SemigroupKind::Heat, &mesh)
}

/// Evaluates a named norm exactly as the library entry point does.
pub fn evaluate_norm(
    name: &str,
    f: &Field,
    alpha: f64,
    t_max: Option<f64>,
    boxes: &BoxFamily,
) -> tlab::Result<(f64, Option<NormResult>)> {
    let r = match name {
        "campanato" => norms::campanato_norm(f, alpha, boxes)?,
        "campanato_pair" => norms::campanato_pair_norm(f, alpha, boxes)?,
        "q" => norms::q_norm(f, alpha, boxes)?,
        "frac_campanato" => norms::frac_campanato_norm(f, alpha, boxes)?,
        "h_alpha2" => norms::h_alpha2_norm(&poisson(f)?, alpha, boxes)?,
        "scaled_h" => norms::scaled_h_norm(&poisson(f)?, alpha, boxes)?,
        "star" => norms::star_norm(&poisson(f)?, alpha, boxes)?,
        "t_alpha2" => norms::t_alpha2_norm(&heat(f)?, alpha, boxes)?,
        "scaled_t" => norms::scaled_t_norm(&heat(f)?, alpha, boxes)?,
        "dagger_linear" => norms::dagger_norm(&heat(f)?, alpha, boxes, norms::DaggerBox::Linear)?,
        "dagger_parabolic" => norms::dagger_norm(&heat(f)?, alpha, boxes, norms::DaggerBox::Parabolic)?,
        "inverse_space" => norms::inverse_space_norm(f, alpha, t_max.unwrap_or(f64::INFINITY), boxes)?,
        "bloch_hb" => return Ok((norms::bloch_hb_norm(&poisson(f)?)?, None)),
        "bloch_cb" => return Ok((norms::bloch_cb_norm(&heat(f)?)?, None)),
        "besov" => return Ok((norms::besov_norm(f, &LogTimeGrid::for_period(f.grid().period()))?, None)),
        other => {
            return Err(tlab::Error::RejectedInput(format!(
                "unknown norm {other:?}; known norms: {}",
                NORMS.join(", ")
            )))
        }
    };
    Ok((r.value, Some(r)))
}

pub fn cmd_norm(cfg: &RunConfig) -> Outcome {
    let name = cfg.norm.name.as_deref().ok_or("no norm given (use --norm)")?;
    if !NORMS.contains(&name) {
        return Err(format!("unknown norm {name:?}; known norms: {}", NORMS.join(", ")));
    }
    let (field, input) = match (&cfg.norm.input, &cfg.norm.member) {
        (Some(path), _) => {
            let f = tlab::io::load_field(path).map_err(|e| format!("cannot load {}: {e}", path.display()))?;
            (f, path.display().to_string())
        }
        (None, Some(member)) => {
            let (specs, mgrid) = corpus(cfg)?;
            let grid = corpus_grid(cfg, mgrid, 256)?;
            let spec = specs
                .iter()
                .find(|s| &s.name == member)
                .ok_or_else(|| format!("no corpus member named {member:?}"))?;
            (generate(spec, &grid).map_err(err)?, member.clone())
        }
        (None, None) => return Err("no input given (use --input or --member)".into()),
    };
    let alpha = cfg.alphas.as_ref().and_then(|a| a.first().copied()).unwrap_or(0.0);
    let boxes = BoxFamily::new(*field.grid(), cfg.boxes).map_err(err)?;
    let (value, result) = evaluate_norm(name, &field, alpha, cfg.norm.t_max, &boxes).map_err(err)?;
    let out = NormOutput { norm: name.into(), alpha, input, value, result };
    write_json(&cfg.out, &format!("norm_{name}.json"), &out)?;
    save_config(cfg)?;
    println!("{name}(alpha = {alpha}) = {value:e}");
    Ok(true)
}

#[derive(Debug, Default, Serialize)]
struct VerifyOutput {
    equivalences: Vec<EquivalenceReport>,
    scaling: Vec<ScalingReport>,
    inclusions: Vec<InclusionReport>,
    /// Checks not run, with the reason.
    skipped: Vec<String>,
}

fn print_report(r: &EquivalenceReport, pass: bool) {
    let verdict = match (r.gate, pass) {
        (verify::Gate::Report, _) => "INFO",
        (_, true) => "PASS",
        (_, false) => "FAIL",
    };
    println!(
        "{verdict} {} | {} | alpha={} spread={} drift={}",
        r.theorem,
        r.relation,
        r.alpha,
        fmt_opt(r.spread),
        fmt_opt(r.drift)
    );
}

pub fn cmd_verify(cfg: &RunConfig) -> Outcome {
    let (specs, mgrid) = corpus(cfg)?;
    let grid = corpus_grid(cfg, mgrid, 256)?;
    let opts = CheckOptions { boxes: cfg.boxes, refine: cfg.verify.refine };
    let alphas = cfg.alphas.clone().unwrap_or_else(|| VERIFY_ALPHAS.to_vec());
    let th = cfg.thresholds;
    let mut out = VerifyOutput::default();
    let mut ok = true;
    for check in &cfg.verify.theorems {
        let mut batch = Vec::new();
        match check.as_str() {
            "2.1" | "3.1" | "4.1" | "2.2" => {
                let f = match check.as_str() {
                    "2.1" => verify::check_theorem_2_1,
                    "3.1" => verify::check_theorem_3_1,
                    "4.1" => verify::check_theorem_4_1,
                    _ => verify::check_lemma_2_2,
                };
                for &a in &alphas {
                    batch.extend(f(&specs, a, &grid, &opts).map_err(|e| format!("{check} at alpha {a}: {e}"))?);
                }
            }
            "4.2" => {
                for &a in &alphas {
                    if a == 0.0 {
                        out.skipped.push("4.2 at alpha 0: both sides collapse to BMO".into());
                        continue;
                    }
                    batch.extend(
                        verify::check_theorem_4_2(&specs, a, &grid, &opts)
                            .map_err(|e| format!("4.2 at alpha {a}: {e}"))?,
                    );
                }
            }
            "scaling" => {
                let bump = CorpusSpec::new("bump", cfg.seed, CorpusKind::Bump, cfg.verify.scaling_max_freq);
                let f = generate(&bump, &grid).map_err(|e| format!("scaling bump: {e}"))?;
                let spec = if cfg.boxes.stride.is_some() { cfg.boxes } else { cfg.boxes.with_stride(1) };
                let boxes = BoxFamily::new(grid, spec).map_err(err)?;
                for &a in &alphas {
                    for n in ScalingNorm::ALL {
                        let r = verify::check_scaling(&f, n, a, 2, Dilation::Localized, &boxes)
                            .map_err(|e| format!("scaling of {} at alpha {a}: {e}", n.name()))?;
                        let pass = r.passes(&th);
                        ok &= pass;
                        println!(
                            "{} scaling | {} | alpha={a} exponent={:.4} expected={}",
                            if !r.gated { "INFO" } else if pass { "PASS" } else { "FAIL" },
                            n.name(),
                            r.measured_exponent,
                            r.expected[0].0
                        );
                        out.scaling.push(r);
                    }
                }
                write_json(&cfg.out, "scaling.json", &out.scaling)?;
                continue;
            }
            "inclusions" => {
                for &b in &cfg.verify.betas {
                    let r = verify::check_inclusions(&specs, b, &grid, &opts)
                        .map_err(|e| format!("inclusions at beta {b}: {e}"))?;
                    for c in &r.chains {
                        let pass = c.passes(&th);
                        ok &= pass;
                        print_report(c, pass);
                    }
                    for m in &r.monotone {
                        ok &= m.holds;
                        println!(
                            "{} monotone | alpha={} beta={} max_ratio={:.4}",
                            if m.holds { "PASS" } else { "FAIL" },
                            m.alpha,
                            m.beta,
                            m.max_ratio
                        );
                    }
                    out.inclusions.push(r);
                }
                write_json(&cfg.out, "inclusions.json", &out.inclusions)?;
                continue;
            }
            other => return Err(format!("unknown check {other:?}; known checks: {}", ALL_CHECKS.join(", "))),
        }
        for r in &batch {
            let pass = r.passes(&th);
            ok &= pass;
            print_report(r, pass);
        }
        write_json(&cfg.out, &format!("theorem_{}.json", check.replace('.', "_")), &batch)?;
        out.equivalences.extend(batch);
    }
    for s in &out.skipped {
        println!("SKIP {s}");
    }
    let mut all = out.equivalences.clone();
    all.extend(out.inclusions.iter().flat_map(|r| r.chains.iter().cloned()));
    write_file(&cfg.out, "summary.csv", &verify::summary_csv(&all))?;
    write_json(&cfg.out, "verify_report.json", &out)?;
    save_config(cfg)?;
    Ok(ok)
}

fn smalldata_csv(reports: &[SmallDataReport]) -> String {
    let mut s = String::from("alpha,delta,converged,iterations,final_residual,sup_part,carleson_part,x_norm,ratio\n");
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.alpha,
                row.delta,
                row.converged,
                row.iterations,
                fmt_opt(row.final_residual),
                fmt_opt(row.sup_part),
                fmt_opt(row.carleson_part),
                fmt_opt(row.x_norm),
                fmt_opt(row.ratio)
            );
        }
    }
    s
}

fn inflation_csv(reports: &[InflationReport]) -> String {
    let mut s = String::from("alpha,epsilon,modes,initial_norm,sup_solution,sup_linear,growth_ratio,x_norm\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:e},{:e},{:e}",
            r.alpha, r.epsilon, r.modes, r.initial_norm, r.sup_solution, r.sup_linear, r.growth_ratio, r.x_norm.total
        );
    }
    s
}

pub fn cmd_ns(cfg: &RunConfig) -> Outcome {
    let ns = &cfg.ns;
    let grid_n = cfg.grid_n.unwrap_or(32);
    match ns.probe {
        Probe::Smalldata => {
            let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![-0.5, 0.0]);
            let mut reports = Vec::new();
            let mut ok = true;
            for &alpha in &alphas {
                let sd = SmallDataConfig {
                    alpha,
                    t_final: ns.t_final,
                    grid_n,
                    deltas: ns.deltas.clone(),
                    seed: cfg.seed,
                    shape_max_freq: ns.shape_max_freq,
                    nodes: ns.nodes,
                    max_iter: ns.max_iter,
                    tol: ns.tol,
                    ratio_bound: ns.ratio_bound,
                    boxes: cfg.boxes,
                    linear_only: ns.linear_only,
                };
                let r = smalldata_probe(&sd).map_err(|e| format!("small-data probe at alpha {alpha}: {e}"))?;
                let no_positive = r.rows.iter().all(|row| row.delta == 0.0);
                // A ladder of zero amplitudes has no ratio to judge.
                let pass = r.passes || no_positive;
                ok &= pass;
                println!(
                    "{} smalldata | alpha={alpha} linear_ratio={:.4} threshold={} max_ratio={}",
                    if pass { "PASS" } else { "FAIL" },
                    r.linear_ratio,
                    fmt_opt(r.threshold),
                    fmt_opt(r.max_ratio_below_threshold)
                );
                reports.push(r);
            }
            write_json(&cfg.out, "smalldata.json", &reports)?;
            write_file(&cfg.out, "smalldata.csv", &smalldata_csv(&reports))?;
            save_config(cfg)?;
            Ok(ok)
        }
        Probe::Inflation => {
            let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![0.5]);
            let mut reports = Vec::new();
            for &alpha in &alphas {
                for &epsilon in &ns.epsilons {
                    for &modes in &ns.modes {
                        let ic = InflationConfig {
                            grid_n,
                            t0: ns.t0,
                            steps: ns.steps,
                            boxes: cfg.boxes,
                            linear_only: ns.linear_only,
                            ..InflationConfig::new(alpha, epsilon, modes)
                        };
                        let r = inflation_probe(&ic)
                            .map_err(|e| format!("inflation probe at alpha {alpha}, K = {modes}: {e}"))?;
                        println!(
                            "INFO inflation | alpha={alpha} epsilon={epsilon} K={modes} growth_ratio={:.6}",
                            r.growth_ratio
                        );
                        for w in &r.warnings {
                            eprintln!("warning: {w}");
                        }
                        reports.push(r);
                    }
                }
            }
            write_json(&cfg.out, "inflation.json", &reports)?;
            write_file(&cfg.out, "inflation.csv", &inflation_csv(&reports))?;
            save_config(cfg)?;
            Ok(true)
        }
    }
}
