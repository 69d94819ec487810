mod output;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccesa::adversary::{
    exposed_subset, partial_sum_attack, AttackError, EavesdropperView, ORACLE_MAX_SURVIVORS,
};
use ccesa::analysis::{
    cost_table_at, p_star, pep_bound, per_bound, privacy_threshold_p, q_from_qtotal,
    reliability_threshold_p, t_lower_bound, t_rule, AnalysisError, CostParams, PerBound,
};
use ccesa::graph::{privacy_predicate, GraphEvolution, Thresholds, VertexSet};
use ccesa::harness::{
    bench_timing, emit, emit_pstar_table, first_transcript, monte_carlo_with_threads, pstar_table,
    BenchParams, Choice, ExperimentConfig, HarnessError, OutputFormat, DEFAULT_SEED, TABLE_N,
    TABLE_Q_TOTAL,
};
use ccesa::protocol::{ProtocolError, RoundConfig, RoundStatus, Transcript};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use thiserror::Error;

use output::write_record;

/// Environment variable overriding the default master seed.
const SEED_ENV: &str = "CCESA_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::Analysis(_)
            | CliError::Harness(HarnessError::Config(_) | HarnessError::Analysis(_))
            | CliError::Protocol(ProtocolError::InvalidParams(_))
            | CliError::Harness(HarnessError::Protocol(ProtocolError::InvalidParams(_)))
            | CliError::Attack(_) => 2,
            CliError::Assertion(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ccesa",
    version,
    about = "Sparse secure aggregation: analysis, simulation and attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form design rules, bounds and costs.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Run a single round or a Monte Carlo experiment from a config file.
    Run(RunArgs),
    /// Tabulated sweeps.
    #[command(subcommand)]
    Sweep(Sweep),
    /// Per-step timing of the complete graph against the sparse graph.
    Bench(BenchArgs),
    /// Eavesdropper analysis of a saved transcript.
    Attack(AttackArgs),
}

#[derive(Args)]
struct CsvFlag {
    /// Emit a CSV header and row instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Analyze {
    /// Connection probability p* and its two components.
    Pstar {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        q_total: f64,
        #[command(flatten)]
        out: CsvFlag,
    },
    /// Threshold from the t rule.
    T {
        #[arg(long)]
        n: usize,
        /// A probability, or `auto` for p*.
        #[arg(long, default_value = "auto")]
        p: Choice<f64>,
        #[arg(long, default_value_t = 0.0)]
        q_total: f64,
        #[command(flatten)]
        out: CsvFlag,
    },
    /// Upper bounds on reliability failure and privacy violation.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "auto")]
        p: Choice<f64>,
        #[arg(long, default_value_t = 0.0)]
        q_total: f64,
        #[arg(long, default_value = "auto")]
        t: Choice<usize>,
        #[command(flatten)]
        out: CsvFlag,
    },
    /// Leading-order communication and computation costs.
    Cost {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        q_total: f64,
        #[arg(long, default_value = "auto")]
        p: Choice<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        m: usize,
        #[arg(long, default_value_t = 32)]
        r: usize,
        #[arg(long = "ak", default_value_t = 256)]
        key_bits: usize,
        #[arg(long = "as", default_value_t = 256)]
        share_bits: usize,
        /// Client groups of the Turbo-aggregate comparison.
        #[arg(long, default_value_t = 10)]
        groups: usize,
        #[command(flatten)]
        out: CsvFlag,
    },
}

#[derive(Args)]
struct RunArgs {
    /// A single-round file, or an experiment grid if it sets `trials`.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for experiments.
    #[arg(long)]
    parallel: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Sweep {
    /// p* over the standard n and q_total grid.
    PstarTable {
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    q_total: f64,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 32)]
    r: u32,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Sparse-graph probability; `auto` is p*.
    #[arg(long, default_value = "auto")]
    p: Choice<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    transcript: PathBuf,
    /// Comma-separated client ids forming the target subset.
    #[arg(long, value_delimiter = ',', conflicts_with = "exhaustive")]
    subset: Option<Vec<usize>>,
    /// One verdict per nonempty proper subset of the Step-2 uploaders.
    #[arg(long)]
    exhaustive: bool,
}

fn default_seed() -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map,
        other => Map::from_iter([("value".to_string(), other)]),
    }
}

fn resolve_p(p: Choice<f64>, n: usize, q: f64) -> Result<f64, CliError> {
    Ok(match p {
        Choice::Fixed(p) => p,
        Choice::Auto => p_star(n, q)?.min(1.0),
    })
}

fn analyze(cmd: Analyze) -> Result<(), CliError> {
    let stdout = io::stdout().lock();
    let (record, csv) = match cmd {
        Analyze::Pstar { n, q_total, out } => {
            let q = q_from_qtotal(q_total)?;
            let record = json!({
                "n": n,
                "q_total": q_total,
                "q": q,
                "p_star": p_star(n, q)?,
                "privacy_p": privacy_threshold_p(n, q)?,
                "reliability_p": reliability_threshold_p(n, q)?,
            });
            (record, out.csv)
        }
        Analyze::T { n, p, q_total, out } => {
            let q = q_from_qtotal(q_total)?;
            let p = resolve_p(p, n, q)?;
            let record = json!({
                "n": n,
                "p": p,
                "t": t_rule(n, p)?,
                "t_lower_bound": t_lower_bound(n, p)?,
            });
            (record, out.csv)
        }
        Analyze::Bounds {
            n,
            p,
            q_total,
            t,
            out,
        } => {
            let q = q_from_qtotal(q_total)?;
            let p = resolve_p(p, n, q)?;
            let t = match t {
                Choice::Fixed(t) => t,
                Choice::Auto => t_rule(n, p)?,
            };
            let per = per_bound(n, p, q, t)?;
            let pep = pep_bound(n, p, q)?;
            let (status, per_log10) = match per {
                PerBound::Applicable(lp) => ("applicable", Some(lp.log10())),
                PerBound::NotApplicable => ("not-applicable", None),
            };
            let record = json!({
                "n": n,
                "p": p,
                "q_total": q_total,
                "q": q,
                "t": t,
                "per_status": status,
                "per_log10": per_log10,
                "per_value": per.log_prob().map(|lp| lp.value()),
                "pep_log10": pep.log10(),
                "pep_value": pep.value(),
            });
            (record, out.csv)
        }
        Analyze::Cost {
            n,
            q_total,
            p,
            m,
            r,
            key_bits,
            share_bits,
            groups,
            out,
        } => {
            let params = CostParams {
                m,
                r,
                key_bits,
                share_bits,
                groups,
            };
            params.validate()?;
            let q = q_from_qtotal(q_total)?;
            let p = resolve_p(p, n, q)?;
            let summary = cost_table_at(n, q_total, p, &params)?;
            (serde_json::to_value(summary)?, out.csv)
        }
    };
    write_record(&object(record), csv, stdout)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn is_experiment(text: &str) -> bool {
    text.lines()
        .filter_map(|l| l.split('#').next()?.split_once('='))
        .any(|(k, _)| k.trim() == "trials")
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let seed = default_seed()?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    if is_experiment(&text) {
        let mut config = ExperimentConfig::parse(&text, seed)?;
        // paths inside the file are relative to it
        config.out = args
            .out
            .or_else(|| config.out.as_ref().map(|o| base.join(o)));
        if let Some(format) = args.format {
            config.format = format;
        }
        if let Some(path) = &config.transcript {
            let transcript = first_transcript(&config)?;
            fs::write(base.join(path), transcript.to_json()?)?;
        }
        let threads = args.parallel.unwrap_or(0);
        let result = monte_carlo_with_threads(&config, threads)?;
        let mut out = open_out(config.out.as_deref())?;
        emit(&result, config.format, &mut out)?;
        out.flush()?;
        let bad: Vec<String> = result
            .cells
            .iter()
            .filter(|c| c.predicate_mismatches + c.aggregate_errors + c.oracle_mismatches > 0)
            .map(|c| {
                format!(
                    "n={} p={} t={}: {} predicate mismatches, {} wrong aggregates, {} oracle mismatches",
                    c.cell.n, c.cell.p, c.cell.t, c.predicate_mismatches, c.aggregate_errors, c.oracle_mismatches
                )
            })
            .collect();
        if !bad.is_empty() {
            return Err(CliError::Assertion(bad.join("; ")));
        }
        return Ok(());
    }
    let round = RoundConfig::parse(&text, base, seed)?;
    let (record, transcript) = round.execute()?;
    if let Some(path) = &round.transcript {
        fs::write(path, transcript.to_json()?)?;
    }
    let mut out = open_out(args.out.as_deref())?;
    let format = args.format.unwrap_or(OutputFormat::Json);
    let value = serde_json::to_value(&record)?;
    match format {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?,
        OutputFormat::Csv => write_record(&object(value), true, &mut out)?,
    }
    out.flush()?;
    match record.outcome {
        RoundStatus::WrongAggregate => Err(CliError::Assertion(
            "aggregate differs from the plaintext sum".into(),
        )),
        _ if record.reliable != (record.outcome == RoundStatus::Success) => Err(
            CliError::Assertion("round outcome disagrees with the reliability predicate".into()),
        ),
        _ => Ok(()),
    }
}

fn sweep(cmd: Sweep) -> Result<(), CliError> {
    let Sweep::PstarTable { format, out } = cmd;
    let table = pstar_table(&TABLE_N, &TABLE_Q_TOTAL)?;
    let mut w = open_out(out.as_deref())?;
    emit_pstar_table(&table, format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let mut params = BenchParams::new(args.n, args.q_total);
    params.m = args.m;
    params.r = args.r;
    params.repeats = args.repeats;
    params.seed = match args.seed {
        Some(s) => s,
        None => default_seed()?,
    };
    if let Choice::Fixed(p) = args.p {
        params.p = Some(p);
    }
    let report = bench_timing(&params)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.within_trend {
        let p = report.rows[1].p;
        return Err(CliError::Assertion(format!(
            "sparse/complete client-time ratios {:.3} (step 1) and {:.3} (step 2) leave [{:.3}, {:.3}]",
            report.step1_ratio,
            report.step2_ratio,
            p / 2.0,
            2.0 * p
        )));
    }
    Ok(())
}

fn verdict(view: &EavesdropperView, subset: &VertexSet) -> Result<Value, CliError> {
    let members = subset.to_vec();
    Ok(match partial_sum_attack(view, subset) {
        Ok(sum) => json!({"subset": members, "recovered": true, "sum": sum}),
        Err(AttackError::Uncancellable(term)) => json!({
            "subset": members,
            "recovered": false,
            "blocking_term": term.to_string(),
        }),
        Err(e) => return Err(e.into()),
    })
}

fn attack(args: AttackArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.transcript)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.transcript.display())))?;
    let transcript = Transcript::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.transcript.display())))?;
    let view = EavesdropperView::from_transcript(&transcript)?;
    let n = view.graph().n();
    let mut out = io::stdout().lock();
    if let Some(ids) = args.subset {
        if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
            return Err(CliError::Config(format!(
                "client {bad} out of range for n = {n}"
            )));
        }
        let subset = VertexSet::from_iter_n(n, ids);
        writeln!(out, "{}", verdict(&view, &subset)?)?;
        return Ok(());
    }
    let v3 = view.v3().to_vec();
    if args.exhaustive {
        if v3.len() > ORACLE_MAX_SURVIVORS {
            return Err(AttackError::TooLarge {
                survivors: v3.len(),
            }
            .into());
        }
        let full = (1u32 << v3.len()) - 1;
        let mut recovered = 0u64;
        for mask in 1..full {
            let subset = VertexSet::from_iter_n(
                n,
                (0..v3.len()).filter(|k| mask >> k & 1 == 1).map(|k| v3[k]),
            );
            let v = verdict(&view, &subset)?;
            recovered += u64::from(v["recovered"] == true);
            writeln!(out, "{v}")?;
        }
        let summary = json!({"summary": true, "subsets": full.saturating_sub(1), "recovered": recovered, "private": recovered == 0});
        writeln!(out, "{summary}")?;
        return Ok(());
    }
    let summary = match exposed_subset(&view) {
        Ok(exposed) => json!({
            "n": n,
            "v3": v3,
            "method": "oracle",
            "private": exposed.is_none(),
            "exposed_subset": exposed.map(|s| s.to_vec()),
        }),
        // too many survivors to enumerate: fall back to the graph predicate
        Err(AttackError::TooLarge { .. }) => {
            let v2 = view.v2().clone();
            let levels = [
                VertexSet::full(n),
                v2.clone(),
                v2,
                view.v3().clone(),
                view.v4().clone(),
            ];
            let evolution = GraphEvolution::from_levels(view.graph().clone(), levels)
                .map_err(|e| CliError::Config(format!("inconsistent transcript: {e}")))?;
            let private = privacy_predicate(&evolution, &Thresholds::Uniform(view.params().t));
            json!({"n": n, "v3": v3, "method": "predicate", "private": private, "exposed_subset": null})
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(out, "{summary}")?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(cmd) => analyze(cmd),
        Command::Run(args) => run(args),
        Command::Sweep(cmd) => sweep(cmd),
        Command::Bench(args) => bench(args),
        Command::Attack(args) => attack(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
