//! Timing shape checks. Only ratios are asserted.

use ccesa::harness::{bench_timing, BenchParams, Scheme};

fn sa_client_ms(n: usize, m: usize, step: usize) -> f64 {
    let mut params = BenchParams::new(n, 0.0);
    params.m = m;
    params.repeats = 1;
    let report = bench_timing(&params).unwrap();
    let row = report.rows.iter().find(|r| r.scheme == Scheme::Sa).unwrap();
    row.client_ms[step]
}

#[test]
fn complete_graph_step1_grows_linearly_in_n() {
    let small = sa_client_ms(100, 1000, 1);
    let large = sa_client_ms(500, 1000, 1);
    let ratio = large / small;
    eprintln!("step-1 client time n=500 / n=100: {ratio:.2}");
    assert!(
        (3.0..=8.0).contains(&ratio),
        "ratio {ratio:.2} outside [3, 8]"
    );
}

#[test]
fn doubling_m_doubles_masking_time() {
    let base = sa_client_ms(60, 2000, 2);
    let doubled = sa_client_ms(60, 4000, 2);
    let ratio = doubled / base;
    eprintln!("step-2 client time m=4000 / m=2000: {ratio:.2}");
    assert!(
        (1.5..=2.5).contains(&ratio),
        "ratio {ratio:.2} outside [1.5, 2.5]"
    );
}
