//! Single-round configuration file and the record a configured round emits.
//!
//! ```text
//! n = 20
//! p = auto            # or a number; auto means p*, capped at 1
//! graph = ring.txt    # edge list, instead of n and p
//! q_total = 0.1       # or q = per-step dropout
//! t = auto            # or an integer; auto means the t rule
//! m = 100
//! r = 32
//! a_k = 256
//! a_s = 256
//! seed = 7
//! transcript = round.json   # optional, relative to the config file
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    run_round, sample_dropouts, synthetic_models, Diagnostic, Party, ProtocolError, ProtocolParams,
    Transcript,
};
use crate::analysis::{p_star, q_from_qtotal, qtotal_from_q, t_rule};
use crate::graph::{
    gen_erdos_renyi, privacy_predicate, reliability_predicate, AssignmentGraph, Thresholds,
};
use crate::seed::derive_rng;

/// A value that is either given or derived from the design rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Choice<T> {
    Auto,
    Fixed(T),
}

impl<T: FromStr> FromStr for Choice<T> {
    type Err = T::Err;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Choice::Auto)
        } else {
            s.parse().map(Choice::Fixed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Topology {
    ErdosRenyi { n: usize, p: Choice<f64> },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundConfig {
    pub topology: Topology,
    pub q: f64,
    pub t: Choice<usize>,
    pub m: usize,
    pub r: u32,
    pub key_bits: u64,
    pub share_bits: u64,
    pub seed: u64,
    /// Where to write the round transcript.
    pub transcript: Option<PathBuf>,
}

fn config_error(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::InvalidParams(msg.into())
}

impl RoundConfig {
    /// Relative graph paths resolve against `base_dir`. `default_seed`
    /// applies when the file has no `seed` key.
    pub fn parse(text: &str, base_dir: &Path, default_seed: u64) -> Result<Self, ProtocolError> {
        let mut n = None;
        let mut p = None;
        let mut graph = None;
        let mut q = None;
        let mut q_total = None;
        let mut cfg = RoundConfig {
            topology: Topology::File(PathBuf::new()),
            q: 0.0,
            t: Choice::Auto,
            m: 10,
            r: 32,
            key_bits: 256,
            share_bits: 256,
            seed: default_seed,
            transcript: None,
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(format!("line {lineno}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || config_error(format!("line {lineno}: invalid {key} {value:?}"));
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "p" => p = Some(value.parse::<Choice<f64>>().map_err(|_| bad())?),
                "graph" => graph = Some(base_dir.join(value)),
                "q" => q = Some(value.parse::<f64>().map_err(|_| bad())?),
                "q_total" => q_total = Some(value.parse::<f64>().map_err(|_| bad())?),
                "t" => cfg.t = value.parse().map_err(|_| bad())?,
                "m" => cfg.m = value.parse().map_err(|_| bad())?,
                "r" => cfg.r = value.parse().map_err(|_| bad())?,
                "a_k" => cfg.key_bits = value.parse().map_err(|_| bad())?,
                "a_s" => cfg.share_bits = value.parse().map_err(|_| bad())?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "transcript" => cfg.transcript = Some(base_dir.join(value)),
                other => {
                    return Err(config_error(format!(
                        "line {lineno}: unknown key {other:?}"
                    )))
                }
            }
        }
        cfg.topology = match (graph, n, p) {
            (Some(path), _, None) => {
                if n.is_some() {
                    // checked against the file when it is loaded
                    return Err(config_error("give either graph or n, not both"));
                }
                Topology::File(path)
            }
            (Some(_), _, Some(_)) => return Err(config_error("give either graph or p, not both")),
            (None, Some(n), p) => Topology::ErdosRenyi {
                n,
                p: p.unwrap_or(Choice::Auto),
            },
            (None, None, _) => return Err(config_error("n or graph is required")),
        };
        cfg.q = match (q, q_total) {
            (Some(_), Some(_)) => return Err(config_error("give either q or q_total, not both")),
            (Some(q), None) => q,
            (None, Some(qt)) => q_from_qtotal(qt).map_err(|e| config_error(e.to_string()))?,
            (None, None) => 0.0,
        };
        if !(0.0..=1.0).contains(&cfg.q) {
            return Err(config_error(format!("q = {} outside [0, 1]", cfg.q)));
        }
        Ok(cfg)
    }

    /// Samples (or loads) the graph and runs one round.
    pub fn run(&self) -> Result<RoundRecord, ProtocolError> {
        self.execute().map(|(record, _)| record)
    }

    /// [`RoundConfig::run`], also handing back the transcript.
    pub fn execute(&self) -> Result<(RoundRecord, Transcript), ProtocolError> {
        let mut rng = derive_rng(self.seed, "topology", 0);
        let graph = match &self.topology {
            Topology::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
                AssignmentGraph::parse_edge_list(&text)?
            }
            Topology::ErdosRenyi { n, p } => {
                let p = match *p {
                    Choice::Fixed(p) => p,
                    Choice::Auto => p_star(*n, self.q)
                        .map_err(|e| config_error(e.to_string()))?
                        .min(1.0),
                };
                gen_erdos_renyi(*n, p, &mut rng)?
            }
        };
        let n = graph.n();
        let design_p = match self.topology {
            Topology::ErdosRenyi {
                p: Choice::Fixed(p),
                ..
            } => p,
            Topology::ErdosRenyi { n, p: Choice::Auto } => p_star(n, self.q)
                .map_err(|e| config_error(e.to_string()))?
                .min(1.0),
            // edge density of the supplied graph
            Topology::File(_) if n > 1 => graph.edge_count() as f64 / (n * (n - 1) / 2) as f64,
            Topology::File(_) => 0.0,
        };
        let t = match self.t {
            Choice::Fixed(t) => t,
            Choice::Auto => t_rule(n, design_p)
                .map_err(|e| config_error(e.to_string()))?
                .min(n),
        };
        let schedule = sample_dropouts(n, self.q, &mut rng)?;
        let mut params = ProtocolParams::new(n, design_p, self.q, t, self.m, self.r);
        params.key_bits = self.key_bits;
        params.share_bits = self.share_bits;
        let models = synthetic_models(&params, self.seed);
        let outcome = run_round(params, graph.clone(), &schedule, models, self.seed)?;
        let thresholds = Thresholds::Uniform(t);
        let totals = outcome.transcript.totals();
        let client_bits: Vec<u64> = totals.clients.iter().map(|c| c.total_bits()).collect();
        let record = RoundRecord {
            n,
            p: design_p,
            q: self.q,
            q_total: qtotal_from_q(self.q).unwrap_or(f64::NAN),
            t,
            m: self.m,
            r: self.r,
            seed: self.seed,
            edges: graph.edge_count(),
            mean_degree: graph.mean_degree(),
            outcome: match &outcome.failure {
                None if outcome.aggregate_correct() => RoundStatus::Success,
                None => RoundStatus::WrongAggregate,
                Some(ProtocolError::ReliabilityFailure { .. }) => RoundStatus::ReliabilityFailure,
                Some(_) => RoundStatus::Error,
            },
            error: outcome.failure.as_ref().map(ToString::to_string),
            survivors: std::array::from_fn(|k| outcome.evolution.level(k + 1).len()),
            reliable: reliability_predicate(&outcome.evolution, &thresholds),
            private: privacy_predicate(&outcome.evolution, &thresholds),
            mean_client_bits: client_bits.iter().sum::<u64>() as f64 / n.max(1) as f64,
            max_client_bits: client_bits.iter().copied().max().unwrap_or(0),
            server_bits: totals.party(Party::Server).total_bits(),
            diagnostics: outcome.diagnostics,
        };
        Ok((record, outcome.transcript))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundStatus {
    Success,
    ReliabilityFailure,
    WrongAggregate,
    Error,
}

/// Summary of one configured round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub q_total: f64,
    pub t: usize,
    pub m: usize,
    pub r: u32,
    pub seed: u64,
    pub edges: usize,
    pub mean_degree: f64,
    pub outcome: RoundStatus,
    pub error: Option<String>,
    /// `|V1|..|V4|`.
    pub survivors: [usize; 4],
    pub reliable: bool,
    pub private: bool,
    pub mean_client_bits: f64,
    pub max_client_bits: u64,
    pub server_bits: u64,
    pub diagnostics: Vec<Diagnostic>,
}
