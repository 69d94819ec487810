//! Per-step wall-clock comparison of the complete-graph baseline and the
//! sparse scheme. Runs single-threaded; absolute times are machine
//! dependent, only ratios are meaningful.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analysis::{p_star, q_from_qtotal, t_rule};
use crate::graph::{gen_complete, gen_erdos_renyi};
use crate::protocol::{run_round, sample_dropouts, synthetic_models, ProtocolParams};
use crate::seed::derive_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Complete assignment graph, `t = ⌊n/2⌋ + 1`.
    Sa,
    /// Erdős–Rényi graph at `p = min(p*, 1)`, `t` from the t rule.
    Ccesa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchParams {
    pub n: usize,
    pub q_total: f64,
    pub m: usize,
    pub r: u32,
    pub seed: u64,
    /// Rounds per scheme; per-step times are medians over rounds.
    pub repeats: usize,
    /// Overrides `p*` for the sparse scheme.
    pub p: Option<f64>,
}

impl BenchParams {
    pub fn new(n: usize, q_total: f64) -> Self {
        Self {
            n,
            q_total,
            m: 1000,
            r: 32,
            seed: 1,
            repeats: 3,
            p: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scheme: Scheme,
    pub p: f64,
    pub t: usize,
    /// Mean per participating client, milliseconds.
    pub client_ms: [f64; 4],
    pub server_ms: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub params: BenchParams,
    pub rows: Vec<BenchRow>,
    /// Sparse over complete client time, Steps 1 and 2.
    pub step1_ratio: f64,
    pub step2_ratio: f64,
    /// Both ratios lie in `[p/2, 2p]`.
    pub within_trend: bool,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k == 0 {
        0.0
    } else if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    }
}

fn bench_scheme(
    params: &BenchParams,
    scheme: Scheme,
    p: f64,
    t: usize,
    q: f64,
) -> Result<BenchRow, HarnessError> {
    let n = params.n;
    let mut client: Vec<[f64; 4]> = Vec::new();
    let mut server: Vec<[f64; 4]> = Vec::new();
    for rep in 0..params.repeats {
        let mut rng = derive_rng(params.seed, "bench", rep as u64);
        let graph = match scheme {
            Scheme::Sa => gen_complete(n),
            Scheme::Ccesa => gen_erdos_renyi(n, p, &mut rng)?,
        };
        let schedule = sample_dropouts(n, q, &mut rng)?;
        let proto = ProtocolParams::new(n, p, q, t, params.m, params.r);
        let models = synthetic_models(&proto, params.seed);
        let outcome = run_round(proto, graph, &schedule, models, params.seed ^ rep as u64)?;
        let mut c = [0.0; 4];
        let mut s = [0.0; 4];
        for k in 0..4 {
            let active = outcome.evolution.level(k + 1).len().max(1) as f64;
            c[k] = outcome.timings.client[k].as_secs_f64() * 1e3 / active;
            s[k] = outcome.timings.server[k].as_secs_f64() * 1e3;
        }
        client.push(c);
        server.push(s);
    }
    let pick = |rows: &[[f64; 4]], k: usize| median(rows.iter().map(|r| r[k]).collect());
    Ok(BenchRow {
        scheme,
        p,
        t,
        client_ms: std::array::from_fn(|k| pick(&client, k)),
        server_ms: std::array::from_fn(|k| pick(&server, k)),
    })
}

pub fn bench_timing(params: &BenchParams) -> Result<BenchReport, HarnessError> {
    if params.n < 2 || params.repeats == 0 || params.m == 0 {
        return Err(HarnessError::Config(
            "bench needs n >= 2, m >= 1 and repeats >= 1".into(),
        ));
    }
    let q = q_from_qtotal(params.q_total)?;
    let p = match params.p {
        Some(p) => p,
        None => p_star(params.n, q)?.clamp(0.0, 1.0),
    };
    let t_sparse = t_rule(params.n, p)?.min(params.n);
    let sa = bench_scheme(params, Scheme::Sa, 1.0, params.n / 2 + 1, q)?;
    let ccesa = bench_scheme(params, Scheme::Ccesa, p, t_sparse, q)?;
    let step1_ratio = ccesa.client_ms[1] / sa.client_ms[1];
    let step2_ratio = ccesa.client_ms[2] / sa.client_ms[2];
    let band = |r: f64| r >= p / 2.0 && r <= 2.0 * p;
    Ok(BenchReport {
        params: *params,
        within_trend: band(step1_ratio) && band(step2_ratio),
        rows: vec![sa, ccesa],
        step1_ratio,
        step2_ratio,
    })
}
