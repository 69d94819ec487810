//! Experiment orchestration: seeded Monte Carlo sweeps, timing benchmarks,
//! the p* table and result serialization.
//!
//! Trial `k` of cell `c` draws everything from the child seed
//! `derive_u64(master, "trial", c << 32 | k)`, so results do not depend on
//! thread count or scheduling.

mod bench;
mod config;
mod emit;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{privacy_oracle, EavesdropperView};
use crate::analysis::{
    p_star, pep_bound, per_bound, q_from_qtotal, t_rule, AnalysisError, PerBound,
};
use crate::graph::{
    gen_erdos_renyi, privacy_predicate, reliability_predicate, GraphError, Thresholds,
};
use crate::protocol::{
    run_round, sample_dropouts, synthetic_models, Party, ProtocolError, ProtocolParams,
    StepTimings, Transcript,
};
use crate::seed::{derive_rng, derive_u64};

pub use bench::{bench_timing, BenchParams, BenchReport, BenchRow, Scheme};
pub use config::{Choice, ExperimentConfig, OutputFormat, ParameterGrid, TrialMode, DEFAULT_SEED};
pub use emit::{emit, emit_pstar_table, CSV_COLUMNS};
pub use sweep::{pstar_table, PStarTable, TABLE_N, TABLE_Q_TOTAL};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Largest `n` at which trials also run the brute-force privacy oracle.
pub const ORACLE_SPOT_CHECK_N: usize = 12;

/// One fully resolved grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub q_total: f64,
    /// Per-step dropout probability.
    pub q: f64,
    pub p: f64,
    pub t: usize,
    pub m: usize,
    pub r: u32,
}

impl Cell {
    pub fn params(&self) -> ProtocolParams {
        ProtocolParams::new(self.n, self.p, self.q, self.t, self.m, self.r)
    }
}

/// Cartesian product in the order n, q_total, p, t, m, r. `auto` resolves to
/// `min(p*, 1)` and the t rule.
pub fn expand_grid(grid: &ParameterGrid) -> Result<Vec<Cell>, HarnessError> {
    let mut cells = Vec::with_capacity(grid.cell_count());
    for &n in &grid.n {
        for &q_total in &grid.q_total {
            let q = q_from_qtotal(q_total)?;
            for &pc in &grid.p {
                let p = match pc {
                    Choice::Fixed(p) => p,
                    Choice::Auto => p_star(n, q)?.clamp(0.0, 1.0),
                };
                for &tc in &grid.t {
                    let t = match tc {
                        Choice::Fixed(t) => t,
                        Choice::Auto => t_rule(n, p)?,
                    };
                    for &m in &grid.m {
                        for &r in &grid.r {
                            cells.push(Cell {
                                n,
                                q_total,
                                q,
                                p,
                                t,
                                m,
                                r,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// What one trial observed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrialOutcome {
    pub reliability_failure: bool,
    pub privacy_violation: bool,
    /// Protocol outcome disagreed with the reliability predicate.
    pub predicate_mismatch: bool,
    /// Server returned a sum that differs from the plaintext oracle.
    pub aggregate_error: bool,
    pub oracle_checked: bool,
    pub oracle_mismatch: bool,
    pub mean_client_bits: f64,
    pub server_bits: f64,
    pub timings: StepTimings,
}

fn trial_seed(master: u64, cell_index: usize, trial: usize) -> u64 {
    derive_u64(master, "trial", ((cell_index as u64) << 32) | trial as u64)
}

/// Runs one trial; in protocol mode also returns the round transcript.
pub fn run_trial(
    cell: &Cell,
    mode: TrialMode,
    master: u64,
    cell_index: usize,
    trial: usize,
) -> Result<(TrialOutcome, Option<Transcript>), HarnessError> {
    let seed = trial_seed(master, cell_index, trial);
    let mut rng = derive_rng(seed, "topology", 0);
    let graph = gen_erdos_renyi(cell.n, cell.p, &mut rng)?;
    let schedule = sample_dropouts(cell.n, cell.q, &mut rng)?;
    let thresholds = Thresholds::Uniform(cell.t);
    let evolution = schedule.evolution(graph.clone())?;
    let reliable = reliability_predicate(&evolution, &thresholds);
    let private = privacy_predicate(&evolution, &thresholds);
    let mut out = TrialOutcome {
        reliability_failure: !reliable,
        privacy_violation: !private,
        ..TrialOutcome::default()
    };
    if mode == TrialMode::Predicate {
        return Ok((out, None));
    }
    let params = cell.params();
    let outcome = run_round(
        params,
        graph,
        &schedule,
        synthetic_models(&params, seed),
        seed,
    )?;
    let decoded = outcome.aggregate.is_some();
    out.reliability_failure = !decoded;
    out.predicate_mismatch = decoded != reliable;
    out.aggregate_error = decoded && !outcome.aggregate_correct();
    if cell.n <= ORACLE_SPOT_CHECK_N {
        if let Ok(view) = EavesdropperView::from_transcript(&outcome.transcript) {
            if let Ok(oracle) = privacy_oracle(&view) {
                out.oracle_checked = true;
                out.oracle_mismatch = oracle != private;
            }
        }
    }
    let totals = outcome.transcript.totals();
    out.mean_client_bits = totals
        .clients
        .iter()
        .map(|c| c.total_bits() as f64)
        .sum::<f64>()
        / cell.n as f64;
    out.server_bits = totals.party(Party::Server).total_bits() as f64;
    out.timings = outcome.timings;
    Ok((out, Some(outcome.transcript)))
}

/// Aggregated statistics of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    #[serde(flatten)]
    pub cell: Cell,
    pub trials: usize,
    pub reliability_failures: usize,
    pub failure_rate: f64,
    pub privacy_violations: usize,
    pub violation_rate: f64,
    pub predicate_mismatches: usize,
    pub aggregate_errors: usize,
    pub oracle_checks: usize,
    pub oracle_mismatches: usize,
    /// `log10` of the reliability bound; absent outside its regime.
    pub per_bound_log10: Option<f64>,
    /// `log10` of the privacy bound; absent when the bound is exactly zero.
    pub pep_bound_log10: Option<f64>,
    pub mean_client_bits: f64,
    pub mean_server_bits: f64,
    /// Mean wall-clock per trial, all clients together.
    pub client_ms: [f64; 4],
    pub server_ms: [f64; 4],
}

impl CellResult {
    fn aggregate(cell: Cell, outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.len();
        let count = |f: fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
        let mean = |f: &dyn Fn(&TrialOutcome) -> f64| {
            outcomes.iter().map(f).sum::<f64>() / trials.max(1) as f64
        };
        let reliability_failures = count(|o| o.reliability_failure);
        let privacy_violations = count(|o| o.privacy_violation);
        let per_bound_log10 = match per_bound(cell.n, cell.p, cell.q, cell.t) {
            Ok(PerBound::Applicable(lp)) => Some(lp.log10()),
            _ => None,
        };
        let pep_bound_log10 = pep_bound(cell.n, cell.p, cell.q)
            .ok()
            .filter(|lp| !lp.is_zero())
            .map(|lp| lp.log10());
        let ms = |pick: &dyn Fn(&StepTimings) -> [std::time::Duration; 4]| {
            let mut out = [0.0; 4];
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = mean(&|o| pick(&o.timings)[k].as_secs_f64() * 1e3);
            }
            out
        };
        Self {
            cell,
            trials,
            reliability_failures,
            failure_rate: reliability_failures as f64 / trials.max(1) as f64,
            privacy_violations,
            violation_rate: privacy_violations as f64 / trials.max(1) as f64,
            predicate_mismatches: count(|o| o.predicate_mismatch),
            aggregate_errors: count(|o| o.aggregate_error),
            oracle_checks: count(|o| o.oracle_checked),
            oracle_mismatches: count(|o| o.oracle_mismatch),
            per_bound_log10,
            pep_bound_log10,
            mean_client_bits: mean(&|o| o.mean_client_bits),
            mean_server_bits: mean(&|o| o.server_bits),
            client_ms: ms(&|t| t.client),
            server_ms: ms(&|t| t.server),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub mode: TrialMode,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Equality ignoring wall-clock fields.
    pub fn same_statistics(&self, other: &Self) -> bool {
        let strip = |r: &Self| {
            let mut r = r.clone();
            for c in &mut r.cells {
                c.client_ms = [0.0; 4];
                c.server_ms = [0.0; 4];
            }
            r
        };
        strip(self) == strip(other)
    }
}

/// Runs every cell of `config` on the global rayon pool.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let cells = expand_grid(&config.grid)?;
    let mut results = Vec::with_capacity(cells.len());
    for (ci, cell) in cells.iter().enumerate() {
        let outcomes = (0..config.trials)
            .into_par_iter()
            .map(|k| run_trial(cell, config.mode, config.seed, ci, k).map(|(o, _)| o))
            .collect::<Result<Vec<_>, _>>()?;
        results.push(CellResult::aggregate(*cell, &outcomes));
    }
    Ok(ExperimentResult {
        seed: config.seed,
        mode: config.mode,
        cells: results,
    })
}

/// [`monte_carlo`] on a dedicated pool of `threads` workers.
pub fn monte_carlo_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentResult, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    pool.install(|| monte_carlo(config))
}

/// Transcript of trial 0 of the first cell, reproducing what
/// [`monte_carlo`] ran.
pub fn first_transcript(config: &ExperimentConfig) -> Result<Transcript, HarnessError> {
    config.validate()?;
    let cells = expand_grid(&config.grid)?;
    let (_, transcript) = run_trial(&cells[0], TrialMode::Protocol, config.seed, 0, 0)?;
    Ok(transcript.expect("protocol mode yields a transcript"))
}
