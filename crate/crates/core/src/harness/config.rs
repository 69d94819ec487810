//! Key-value experiment configuration.
//!
//! ```text
//! # one `key = value` per line; lists are comma separated
//! n = 50, 100
//! q_total = 0, 0.1
//! p = auto            # or numbers; auto means p*
//! t = auto            # or integers; auto means the t rule
//! m = 10
//! r = 32
//! trials = 200
//! seed = 7
//! mode = protocol     # or predicate
//! out = results.csv
//! format = csv        # or json
//! transcript = round.json
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;

pub use crate::protocol::Choice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialMode {
    /// Execute every round of the protocol.
    Protocol,
    /// Sample graphs and dropouts and evaluate only the predicates.
    Predicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(HarnessError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub n: Vec<usize>,
    pub q_total: Vec<f64>,
    pub p: Vec<Choice<f64>>,
    pub t: Vec<Choice<usize>>,
    pub m: Vec<usize>,
    pub r: Vec<u32>,
}

impl Default for ParameterGrid {
    fn default() -> Self {
        Self {
            n: Vec::new(),
            q_total: vec![0.0],
            p: vec![Choice::Auto],
            t: vec![Choice::Auto],
            m: vec![10],
            r: vec![32],
        }
    }
}

impl ParameterGrid {
    pub fn cell_count(&self) -> usize {
        self.n.len()
            * self.q_total.len()
            * self.p.len()
            * self.t.len()
            * self.m.len()
            * self.r.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: ParameterGrid,
    pub trials: usize,
    pub seed: u64,
    pub mode: TrialMode,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Where to write the transcript of the first protocol round.
    pub transcript: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 2021;

impl ExperimentConfig {
    pub fn new(grid: ParameterGrid, trials: usize, seed: u64) -> Self {
        Self {
            grid,
            trials,
            seed,
            mode: TrialMode::Protocol,
            out: None,
            format: OutputFormat::Json,
            transcript: None,
        }
    }

    /// Parses the key-value format. `default_seed` applies when the file
    /// has no `seed` key.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self, HarnessError> {
        let mut cfg = Self::new(ParameterGrid::default(), 100, default_seed);
        let mut format_given = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {lineno}: expected key = value"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                HarnessError::Config(format!("line {lineno}: invalid {what} {value:?}"))
            };
            match key {
                "n" => cfg.grid.n = list(value).map_err(|_| bad("n"))?,
                "q_total" => cfg.grid.q_total = list(value).map_err(|_| bad("q_total"))?,
                "p" => cfg.grid.p = list(value).map_err(|_| bad("p"))?,
                "t" => cfg.grid.t = list(value).map_err(|_| bad("t"))?,
                "m" => cfg.grid.m = list(value).map_err(|_| bad("m"))?,
                "r" => cfg.grid.r = list(value).map_err(|_| bad("r"))?,
                "trials" => cfg.trials = value.parse().map_err(|_| bad("trials"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "mode" => {
                    cfg.mode = match value {
                        "protocol" => TrialMode::Protocol,
                        "predicate" => TrialMode::Predicate,
                        _ => return Err(bad("mode")),
                    }
                }
                "out" => {
                    let path = PathBuf::from(value);
                    if !format_given {
                        if let Some(f) = path
                            .extension()
                            .and_then(|e| e.to_str())
                            .and_then(|e| e.parse().ok())
                        {
                            cfg.format = f;
                        }
                    }
                    cfg.out = Some(path);
                }
                "format" => {
                    cfg.format = value.parse().map_err(|_| bad("format"))?;
                    format_given = true;
                }
                "transcript" => cfg.transcript = Some(PathBuf::from(value)),
                other => {
                    return Err(HarnessError::Config(format!(
                        "line {lineno}: unknown key {other:?}"
                    )));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let g = &self.grid;
        if g.cell_count() == 0 {
            return Err(HarnessError::Config("parameter grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if g.n.iter().any(|&n| n < 2) {
            return Err(HarnessError::Config("every n must be at least 2".into()));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !g.q_total.iter().all(|&q| unit(q)) {
            return Err(HarnessError::Config(
                "q_total values must lie in [0, 1]".into(),
            ));
        }
        if !g
            .p
            .iter()
            .all(|c| matches!(c, Choice::Auto) || matches!(c, Choice::Fixed(p) if unit(*p)))
        {
            return Err(HarnessError::Config("p values must lie in [0, 1]".into()));
        }
        if g.t.contains(&Choice::Fixed(0)) {
            return Err(HarnessError::Config("t must be at least 1".into()));
        }
        if g.m.contains(&0) || !g.r.iter().all(|r| (1..=64).contains(r)) {
            return Err(HarnessError::Config(
                "m must be positive and r in 1..=64".into(),
            ));
        }
        Ok(())
    }
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, T::Err> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}
