//! `tlab`: corpus generation, norm evaluation, verification runs and
//! Navier-Stokes probes.
//!
//! Exit codes: 0 when every threshold holds, 1 when some threshold fails,
//! 2 on errors (bad input, missing files, invalid parameters).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tlab::BoxSpec;

use config::{Command, Probe, RunConfig};

#[derive(Parser)]
#[command(name = "tlab", version, about = "Spectral laboratory for Campanato-type norms on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the seeded corpus and its manifest.
    Corpus {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one norm on a field file or a corpus member.
    Norm {
        #[command(flatten)]
        common: Common,
        /// Norm name, e.g. campanato, scaled_h, inverse_space, besov.
        #[arg(long = "norm")]
        name: Option<String>,
        /// Field file in the tlab binary format.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Corpus member name.
        #[arg(long)]
        member: Option<String>,
        /// Time horizon for inverse_space (default infinite).
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Run norm-equivalence, scaling and inclusion checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Checks to run: 2.1, 3.1, 4.1, 4.2, 2.2, scaling, inclusions or all.
        #[arg(long = "theorem", value_delimiter = ',')]
        theorems: Option<Vec<String>>,
        /// Exponents for the inclusion chains.
        #[arg(long = "beta", value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        spread_threshold: Option<f64>,
        #[arg(long)]
        drift_threshold: Option<f64>,
        #[arg(long)]
        scaling_threshold: Option<f64>,
        /// Skip the 2N recomputation.
        #[arg(long)]
        no_refine: bool,
    },
    /// Small-data or norm-inflation experiments on the 3D torus.
    Ns {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        probe: Option<Probe>,
        /// Amplitude ladder for the small-data probe.
        #[arg(long = "delta", value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        t_final: Option<f64>,
        /// Picard time nodes.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        ratio_bound: Option<f64>,
        /// Initial-data norms for the inflation probe.
        #[arg(long = "epsilon", value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        /// Numbers of shear modes for the inflation probe.
        #[arg(long = "modes", value_delimiter = ',')]
        modes: Option<Vec<usize>>,
        /// Final time of the inflation probe.
        #[arg(long)]
        t0: Option<f64>,
        /// Time steps of the inflation probe.
        #[arg(long)]
        steps: Option<usize>,
        /// Drop the nonlinear term.
        #[arg(long)]
        linear_only: bool,
    },
    /// Re-run a saved configuration (for instance `out/config.json`).
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON or TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Spatial dimension.
    #[arg(long)]
    dims: Option<usize>,
    /// Torus period.
    #[arg(long)]
    period: Option<f64>,
    /// Comma-separated exponents, e.g. -0.5,0,0.5.
    #[arg(long = "alpha", value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    /// Box family as jmin:jmax:stride; empty fields keep their defaults.
    #[arg(long)]
    boxes: Option<String>,
    /// Corpus manifest.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn resolve(self, command: Command) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.command = Some(command);
        if let Some(n) = self.grid {
            cfg.grid_n = Some(n);
        }
        if let Some(d) = self.dims {
            cfg.dims = d;
        }
        if let Some(p) = self.period {
            cfg.period = p;
        }
        if self.alphas.is_some() {
            cfg.alphas = self.alphas;
        }
        if let Some(b) = &self.boxes {
            cfg.boxes = BoxSpec::parse(b).map_err(|e| e.to_string())?;
        }
        if self.corpus.is_some() {
            cfg.corpus = self.corpus;
        }
        if let Some(o) = self.out {
            cfg.out = o;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn resolve(cmd: Cmd) -> Result<RunConfig, String> {
    Ok(match cmd {
        Cmd::Corpus { common } => common.resolve(Command::Corpus)?,
        Cmd::Norm { common, name, input, member, t_max } => {
            let mut cfg = common.resolve(Command::Norm)?;
            let n = &mut cfg.norm;
            if name.is_some() {
                n.name = name;
            }
            if input.is_some() {
                n.input = input;
            }
            if member.is_some() {
                n.member = member;
            }
            if t_max.is_some() {
                n.t_max = t_max;
            }
            cfg
        }
        Cmd::Verify { common, theorems, betas, spread_threshold, drift_threshold, scaling_threshold, no_refine } => {
            let mut cfg = common.resolve(Command::Verify)?;
            if let Some(t) = theorems {
                cfg.verify.theorems = if t.iter().any(|s| s == "all") {
                    commands::ALL_CHECKS.iter().map(|s| s.to_string()).collect()
                } else {
                    t
                };
            }
            set(&mut cfg.verify.betas, betas);
            set(&mut cfg.thresholds.spread, spread_threshold);
            set(&mut cfg.thresholds.drift, drift_threshold);
            set(&mut cfg.thresholds.scaling, scaling_threshold);
            if no_refine {
                cfg.verify.refine = false;
            }
            cfg
        }
        Cmd::Ns {
            common,
            probe,
            deltas,
            t_final,
            nodes,
            max_iter,
            ratio_bound,
            epsilons,
            modes,
            t0,
            steps,
            linear_only,
        } => {
            let mut cfg = common.resolve(Command::Ns)?;
            let ns = &mut cfg.ns;
            set(&mut ns.probe, probe);
            set(&mut ns.deltas, deltas);
            set(&mut ns.t_final, t_final);
            set(&mut ns.nodes, nodes);
            set(&mut ns.max_iter, max_iter);
            set(&mut ns.ratio_bound, ratio_bound);
            set(&mut ns.epsilons, epsilons);
            set(&mut ns.modes, modes);
            set(&mut ns.t0, t0);
            set(&mut ns.steps, steps);
            if linear_only {
                ns.linear_only = true;
            }
            cfg
        }
        Cmd::Run { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if cfg.command.is_none() {
                return Err(format!("{} does not name a command", config.display()));
            }
            set(&mut cfg.out, out);
            cfg
        }
    })
}

fn execute(cfg: &RunConfig) -> commands::Outcome {
    if let Some(k) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| e.to_string())?;
    }
    match cfg.command.expect("resolved configs name a command") {
        Command::Corpus => commands::cmd_corpus(cfg),
        Command::Norm => commands::cmd_norm(cfg),
        Command::Verify => commands::cmd_verify(cfg),
        Command::Ns => commands::cmd_ns(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(cli.command).and_then(|cfg| execute(&cfg)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some thresholds failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
