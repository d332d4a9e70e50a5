//! Run configuration: everything a run depends on, loadable from JSON or TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tlab::verify::Thresholds;
use tlab::BoxSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Corpus,
    Norm,
    Verify,
    Ns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    Smalldata,
    Inflation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormConfig {
    /// Norm name, see `NORMS`.
    pub name: Option<String>,
    /// A `.tlab` field file.
    pub input: Option<PathBuf>,
    /// A corpus member name, generated from the corpus manifest or the default corpus.
    pub member: Option<String>,
    /// Time horizon of the inverse-space norm; absent means infinite.
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Any of `2.1 3.1 4.1 4.2 2.2 scaling inclusions`.
    pub theorems: Vec<String>,
    /// Exponents for the inclusion chains.
    pub betas: Vec<f64>,
    pub refine: bool,
    /// Band limit of the localized bump used by the scaling checks.
    pub scaling_max_freq: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            theorems: crate::commands::ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
            betas: vec![0.25, 0.5],
            refine: true,
            scaling_max_freq: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NsConfig {
    pub probe: Probe,
    pub deltas: Vec<f64>,
    pub t_final: f64,
    pub nodes: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub ratio_bound: f64,
    pub shape_max_freq: usize,
    pub epsilons: Vec<f64>,
    pub modes: Vec<usize>,
    pub t0: f64,
    pub steps: usize,
    pub linear_only: bool,
}

impl Default for NsConfig {
    fn default() -> Self {
        let sd = tlab::ns3d::SmallDataConfig::new(0.0);
        let inf = tlab::ns3d::InflationConfig::new(0.5, 1.0, 8);
        Self {
            probe: Probe::Smalldata,
            deltas: sd.deltas,
            t_final: sd.t_final,
            nodes: sd.nodes,
            max_iter: sd.max_iter,
            tol: sd.tol,
            ratio_bound: sd.ratio_bound,
            shape_max_freq: sd.shape_max_freq,
            epsilons: vec![1.0],
            modes: vec![1, 8],
            t0: inf.t0,
            steps: inf.steps,
            linear_only: false,
        }
    }
}

/// A complete, reproducible description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    /// Points per axis; each command has its own default.
    pub grid_n: Option<usize>,
    pub dims: usize,
    pub period: f64,
    pub alphas: Option<Vec<f64>>,
    pub boxes: BoxSpec,
    /// Corpus manifest; the default corpus is used when absent.
    pub corpus: Option<PathBuf>,
    pub thresholds: Thresholds,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub norm: NormConfig,
    pub verify: VerifyConfig,
    pub ns: NsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            grid_n: None,
            dims: 1,
            period: 1.0,
            alphas: None,
            boxes: BoxSpec::default(),
            corpus: None,
            thresholds: Thresholds::default(),
            out: PathBuf::from("out"),
            seed: 7,
            threads: None,
            norm: NormConfig::default(),
            verify: VerifyConfig::default(),
            ns: NsConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `.toml` as TOML and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_toml_round_trip() {
        let mut c = RunConfig::default();
        c.command = Some(Command::Verify);
        c.alphas = Some(vec![-0.5, 0.0]);
        c.boxes = BoxSpec::parse("2:5:4").unwrap();
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let t = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&t).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c: RunConfig = toml::from_str("seed = 3\n[verify]\ntheorems = [\"2.1\"]\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.verify.theorems, vec!["2.1"]);
        assert!(c.verify.refine);
        assert!(toml::from_str::<RunConfig>("sede = 3").is_err());
    }
}
