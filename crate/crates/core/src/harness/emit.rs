//! CSV and JSON writers.
//!
//! CSV columns are fixed (see [`CSV_COLUMNS`]); absent optional values are
//! empty fields. JSON is the pretty-printed serde form and parses back to an
//! identical value.

use std::io::Write;

use super::{CellResult, ExperimentResult, HarnessError, OutputFormat, PStarTable};

pub const CSV_COLUMNS: [&str; 28] = [
    "n",
    "q_total",
    "q",
    "p",
    "t",
    "m",
    "r",
    "trials",
    "reliability_failures",
    "failure_rate",
    "privacy_violations",
    "violation_rate",
    "predicate_mismatches",
    "aggregate_errors",
    "oracle_checks",
    "oracle_mismatches",
    "per_bound_log10",
    "pep_bound_log10",
    "mean_client_bits",
    "mean_server_bits",
    "client_ms_step0",
    "client_ms_step1",
    "client_ms_step2",
    "client_ms_step3",
    "server_ms_step0",
    "server_ms_step1",
    "server_ms_step2",
    "server_ms_step3",
];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn row(c: &CellResult) -> Vec<String> {
    let mut out = vec![
        c.cell.n.to_string(),
        c.cell.q_total.to_string(),
        c.cell.q.to_string(),
        c.cell.p.to_string(),
        c.cell.t.to_string(),
        c.cell.m.to_string(),
        c.cell.r.to_string(),
        c.trials.to_string(),
        c.reliability_failures.to_string(),
        c.failure_rate.to_string(),
        c.privacy_violations.to_string(),
        c.violation_rate.to_string(),
        c.predicate_mismatches.to_string(),
        c.aggregate_errors.to_string(),
        c.oracle_checks.to_string(),
        c.oracle_mismatches.to_string(),
        opt(c.per_bound_log10),
        opt(c.pep_bound_log10),
        c.mean_client_bits.to_string(),
        c.mean_server_bits.to_string(),
    ];
    out.extend(c.client_ms.iter().map(f64::to_string));
    out.extend(c.server_ms.iter().map(f64::to_string));
    out
}

/// Writes `result` in `format`. An empty result yields a header-only CSV.
pub fn emit<W: Write>(
    result: &ExperimentResult,
    format: OutputFormat,
    mut out: W,
) -> Result<(), HarnessError> {
    match format {
        OutputFormat::Json => {
            out.write_all(result.to_json()?.as_bytes())?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for c in &result.cells {
                w.write_record(row(c))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Rows are `q_total`, columns are `n`.
pub fn emit_pstar_table<W: Write>(
    table: &PStarTable,
    format: OutputFormat,
    mut out: W,
) -> Result<(), HarnessError> {
    match format {
        OutputFormat::Json => {
            out.write_all(serde_json::to_string_pretty(table)?.as_bytes())?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let header =
                std::iter::once("q_total".to_string()).chain(table.n.iter().map(usize::to_string));
            w.write_record(header)?;
            for (q, values) in table.q_total.iter().zip(&table.values) {
                let cells =
                    std::iter::once(q.to_string()).chain(values.iter().map(|v| format!("{v:.3}")));
                w.write_record(cells)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{
        monte_carlo, pstar_table, ExperimentConfig, ParameterGrid, TrialMode, TABLE_N,
        TABLE_Q_TOTAL,
    };

    fn small_result() -> ExperimentResult {
        let grid = ParameterGrid {
            n: vec![6, 8],
            q_total: vec![0.0, 0.1],
            m: vec![2],
            r: vec![8],
            ..ParameterGrid::default()
        };
        let mut cfg = ExperimentConfig::new(grid, 4, 3);
        cfg.mode = TrialMode::Protocol;
        monte_carlo(&cfg).unwrap()
    }

    #[test]
    fn empty_result_is_header_only() {
        let empty = ExperimentResult {
            seed: 0,
            mode: TrialMode::Predicate,
            cells: vec![],
        };
        let mut buf = Vec::new();
        emit(&empty, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn csv_rows_have_every_column() {
        let res = small_result();
        let mut buf = Vec::new();
        emit(&res, OutputFormat::Csv, &mut buf).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(reader.headers().unwrap().len(), CSV_COLUMNS.len());
        let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.len() == CSV_COLUMNS.len()));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let res = small_result();
        let mut first = Vec::new();
        emit(&res, OutputFormat::Json, &mut first).unwrap();
        let loaded = ExperimentResult::from_json(std::str::from_utf8(&first).unwrap()).unwrap();
        assert_eq!(loaded, res);
        let mut second = Vec::new();
        emit(&loaded, OutputFormat::Json, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn pstar_csv_layout() {
        let table = pstar_table(&TABLE_N, &TABLE_Q_TOTAL).unwrap();
        let mut buf = Vec::new();
        emit_pstar_table(&table, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "q_total,100,200,300,400,500,600,700,800,900,1000");
        assert!(lines[1].starts_with("0,0.636,0.484,"), "{}", lines[1]);
    }
}
