//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the terminal.

use std::time::Instant;

use ccesa::adversary::{privacy_oracle, EavesdropperView};
use ccesa::analysis::{
    bandwidth_ccesa, comm_total_ccesa, p_star, pep_bound, per_bound, q_from_qtotal, t_rule,
    turbo_aggregate_comm, PerBound,
};
use ccesa::crypto::{
    ae_decrypt, ae_encrypt, DhGroup, FieldElement, PrgSeed, PrimeField, ShamirScheme, ShareKind,
};
use ccesa::graph::{
    gen_complete, gen_erdos_renyi, privacy_predicate, reliability_predicate, AssignmentGraph,
    GraphEvolution, Thresholds, VertexSet,
};
use ccesa::harness::{
    bench_timing, monte_carlo, BenchParams, ExperimentConfig, ParameterGrid, TrialMode,
};
use ccesa::protocol::{
    run_round, sample_dropouts, synthetic_models, DropoutSchedule, ProtocolParams, Round,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Verdict = Result<String, String>;

const PSTAR_N: [usize; 10] = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];
const PSTAR_Q: [f64; 4] = [0.0, 0.01, 0.05, 0.1];
const PSTAR_TABLE: [[f64; 10]; 4] = [
    [
        0.636, 0.484, 0.411, 0.365, 0.333, 0.308, 0.289, 0.273, 0.260, 0.248,
    ],
    [
        0.649, 0.494, 0.419, 0.373, 0.340, 0.315, 0.295, 0.280, 0.265, 0.254,
    ],
    [
        0.707, 0.538, 0.457, 0.406, 0.370, 0.344, 0.321, 0.304, 0.289, 0.276,
    ],
    [
        0.795, 0.605, 0.513, 0.456, 0.416, 0.385, 0.361, 0.341, 0.325, 0.311,
    ],
];

fn pstar_table() -> Verdict {
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    for (qi, &qt) in PSTAR_Q.iter().enumerate() {
        let q = q_from_qtotal(qt).map_err(|e| e.to_string())?;
        for (ni, &n) in PSTAR_N.iter().enumerate() {
            let p: f64 = p_star(n, q).map_err(|e| e.to_string())?;
            let diff = (p - PSTAR_TABLE[qi][ni]).abs();
            worst = worst.max(diff);
            if diff > 0.0005 {
                misses.push(format!(
                    "(q_total={qt}, n={n}) got {p:.5} want {}",
                    PSTAR_TABLE[qi][ni]
                ));
            }
        }
    }
    if misses.is_empty() {
        Ok(format!(
            "40/40 cells within 0.0005, max deviation {worst:.5}"
        ))
    } else {
        Err(format!(
            "{}/40 cells off: {}",
            misses.len(),
            misses.join("; ")
        ))
    }
}

fn t_values() -> Verdict {
    let cases = [
        (100, 0.0, 43),
        (100, 0.1, 51),
        (300, 0.0, 83),
        (300, 0.1, 98),
        (500, 0.0, 112),
        (500, 0.1, 133),
    ];
    let mut got = Vec::new();
    for (n, qt, want) in cases {
        let p: f64 = p_star(n, q_from_qtotal(qt).unwrap()).unwrap();
        let t = t_rule(n, p).map_err(|e| e.to_string())?;
        if t != want {
            return Err(format!("(n={n}, q_total={qt}) gave t={t}, want {want}"));
        }
        got.push(t.to_string());
    }
    Ok(format!("t = {}", got.join(", ")))
}

fn exact_aggregation() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE);
    let (mut reliable, mut checked) = (0, 0);
    for round in 0..1000u64 {
        let n = rng.gen_range(5..=50);
        let qt = if round % 2 == 0 { 0.0 } else { 0.1 };
        let q: f64 = q_from_qtotal(qt).unwrap();
        let floor: f64 = p_star(n, q).unwrap().min(1.0);
        let p = rng.gen_range(floor..=1.0);
        let t = t_rule(n, p).unwrap().clamp(1, n);
        let graph = gen_erdos_renyi(n, p, &mut rng).map_err(|e| e.to_string())?;
        let schedule = sample_dropouts(n, q, &mut rng).map_err(|e| e.to_string())?;
        let params = ProtocolParams::new(n, p, q, t, 16, 32);
        let models = synthetic_models(&params, round);
        let outcome = run_round(params, graph.clone(), &schedule, models.clone(), round)
            .map_err(|e| e.to_string())?;
        checked += 1;
        if !reliability_predicate(&outcome.evolution, &Thresholds::Uniform(t)) {
            continue;
        }
        reliable += 1;
        let mut want = ccesa::crypto::ResidueVector::zeros(16, 32);
        for i in outcome.evolution.level(3).iter() {
            want += &models[i];
        }
        match &outcome.aggregate {
            Some(sum) if *sum == want => {}
            Some(_) => {
                return Err(format!(
                    "round {round} (n={n}): reliable but the sum differs"
                ))
            }
            None => {
                return Err(format!(
                    "round {round} (n={n}): reliable but undecoded: {:?}",
                    outcome.failure
                ))
            }
        }
    }
    Ok(format!(
        "{reliable}/{checked} reliable rounds decoded exactly"
    ))
}

fn subsets(of: &VertexSet) -> Vec<VertexSet> {
    let members = of.to_vec();
    (0..1u32 << members.len())
        .map(|mask| {
            VertexSet::from_iter_n(
                of.universe(),
                members
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &v)| v),
            )
        })
        .collect()
}

#[derive(Default)]
struct OracleTally {
    leaves: u64,
    reliability_mismatches: Vec<String>,
    privacy_mismatches: Vec<String>,
}

fn check_leaf(round: &Round, levels: &[VertexSet], v4: &VertexSet, tally: &mut OracleTally) {
    let mut leaf = round.clone();
    let decoded = leaf.step3(v4);
    let graph = leaf.transcript().graph().clone();
    let t = leaf.params().t;
    let evolution = GraphEvolution::from_levels(
        graph.clone(),
        [
            levels[0].clone(),
            levels[1].clone(),
            levels[2].clone(),
            levels[3].clone(),
            v4.clone(),
        ],
    )
    .expect("nested levels");
    let thresholds = Thresholds::Uniform(t);
    let expected = leaf.plaintext_sum(&levels[3]);
    let decodable = matches!(&decoded, Ok(sum) if *sum == expected);
    let label = || {
        format!(
            "edges={:?} t={t} levels={:?}",
            graph.edges().collect::<Vec<_>>(),
            evolution_sizes(&evolution)
        )
    };
    if decodable != reliability_predicate(&evolution, &thresholds) {
        tally.reliability_mismatches.push(label());
    }
    let oracle =
        EavesdropperView::from_transcript(leaf.transcript()).and_then(|v| privacy_oracle(&v));
    match oracle {
        Ok(private) if private == privacy_predicate(&evolution, &thresholds) => {}
        other => tally
            .privacy_mismatches
            .push(format!("{} oracle={other:?}", label())),
    }
    tally.leaves += 1;
}

fn evolution_sizes(e: &GraphEvolution) -> Vec<Vec<usize>> {
    (1..=4).map(|k| e.level(k).to_vec()).collect()
}

fn oracle_equivalence() -> Verdict {
    let mut tally = OracleTally::default();
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        for mask in 0..1u32 << pairs.len() {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e);
            let graph = AssignmentGraph::from_edges(n, edges).map_err(|e| e.to_string())?;
            for t in 1..=n {
                let params = ProtocolParams::new(n, 0.5, 0.0, t, 1, 8);
                let models = synthetic_models(&params, u64::from(mask));
                let base = Round::new(params, graph.clone(), models, u64::from(mask))
                    .map_err(|e| e.to_string())?;
                let v0 = VertexSet::full(n);
                for v1 in subsets(&v0) {
                    let mut r1 = base.clone();
                    r1.step0(&v1).map_err(|e| e.to_string())?;
                    for v2 in subsets(&v1) {
                        let mut r2 = r1.clone();
                        r2.step1(&v2).map_err(|e| e.to_string())?;
                        for v3 in subsets(&v2) {
                            let mut r3 = r2.clone();
                            r3.step2(&v3).map_err(|e| e.to_string())?;
                            let levels = [v0.clone(), v1.clone(), v2.clone(), v3.clone()];
                            for v4 in subsets(&v3) {
                                check_leaf(&r3, &levels, &v4, &mut tally);
                            }
                        }
                    }
                }
            }
        }
    }
    let bad = tally.reliability_mismatches.len() + tally.privacy_mismatches.len();
    if bad == 0 {
        Ok(format!("{} evolutions, 0 mismatches", tally.leaves))
    } else {
        let sample: Vec<_> = tally
            .reliability_mismatches
            .iter()
            .take(3)
            .chain(tally.privacy_mismatches.iter().take(3))
            .cloned()
            .collect();
        Err(format!(
            "{} reliability and {} privacy mismatches over {} evolutions, e.g. {}",
            tally.reliability_mismatches.len(),
            tally.privacy_mismatches.len(),
            tally.leaves,
            sample.join(" | ")
        ))
    }
}

fn bound_values() -> Verdict {
    let pep = pep_bound(100, 0.636f64, 0.0).map_err(|e| e.to_string())?;
    let per = per_bound(500, 0.3327f64, 0.0, 112).map_err(|e| e.to_string())?;
    let PerBound::Applicable(per) = per else {
        return Err("reliability bound not applicable at (500, 0.3327, 0, 112)".into());
    };
    let (pep10, per10) = (pep.log10(), per.log10());
    if !pep10.is_finite() || !per10.is_finite() {
        return Err(format!("non-finite log bounds: {pep10}, {per10}"));
    }
    if pep10 <= -40.0 && per10 <= -2.0 {
        Ok(format!(
            "privacy bound 10^{pep10:.2}, reliability bound 10^{per10:.2}"
        ))
    } else {
        Err(format!("privacy bound 10^{pep10:.2} (need <= -40), reliability bound 10^{per10:.2} (need <= -2)"))
    }
}

fn monte_carlo_consistency() -> Verdict {
    let grid = ParameterGrid {
        n: vec![100],
        q_total: vec![0.1],
        m: vec![10],
        r: vec![32],
        ..ParameterGrid::default()
    };
    let mut config = ExperimentConfig::new(grid, 2000, 2021);
    config.mode = TrialMode::Protocol;
    let result = monte_carlo(&config).map_err(|e| e.to_string())?;
    let cell = &result.cells[0];
    let summary = format!(
        "p={:.4} t={}: failure rate {:.4}, {} privacy violations, {} predicate mismatches, {} wrong aggregates",
        cell.cell.p,
        cell.cell.t,
        cell.failure_rate,
        cell.privacy_violations,
        cell.predicate_mismatches,
        cell.aggregate_errors
    );
    if cell.failure_rate <= 0.02 && cell.privacy_violations == 0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn cost_accounting() -> Verdict {
    let (m, r) = (7usize, 32u32);
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let mut graphs = vec![gen_complete(9), AssignmentGraph::empty(4)];
    graphs.push(AssignmentGraph::from_edges(6, (1..6).map(|j| (0, j))).unwrap());
    for &(n, p) in &[(12, 0.3), (20, 0.5), (30, 0.7)] {
        graphs.push(gen_erdos_renyi(n, p, &mut rng).unwrap());
    }
    let mut clients = 0;
    for (gi, graph) in graphs.into_iter().enumerate() {
        let n = graph.n();
        let params = ProtocolParams::new(n, 0.5, 0.0, 1, m, r);
        let schedule = DropoutSchedule::none(n);
        let outcome = run_round(
            params,
            graph.clone(),
            &schedule,
            synthetic_models(&params, 1),
            gi as u64,
        )
        .map_err(|e| e.to_string())?;
        let totals = outcome.transcript.totals();
        for (i, traffic) in totals.clients.iter().enumerate() {
            let want =
                bandwidth_ccesa(graph.degree(i) as f64, 256, 256) + (m as f64) * f64::from(r);
            if traffic.total_bits() as f64 != want {
                return Err(format!(
                    "graph {gi} client {i}: {} bits, closed form {want}",
                    traffic.total_bits()
                ));
            }
            clients += 1;
        }
    }
    let ratio: f64 = comm_total_ccesa::<f64>(100, 256, 256, 1_000_000, 32)
        / turbo_aggregate_comm::<f64>(100, 1_000_000, 32, 10);
    if ratio > 0.03 {
        return Err(format!("Turbo-aggregate ratio {ratio:.4} exceeds 0.03"));
    }
    Ok(format!(
        "{clients} clients match the closed form exactly; Turbo-aggregate ratio {ratio:.4}"
    ))
}

/// Replays a fixed list of words, so `deal` draws exactly the polynomial
/// coefficients we choose. Each coefficient fills both halves of a u128 draw.
struct Scripted(std::vec::IntoIter<u64>);

impl RngCore for Scripted {
    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next().expect("script long enough")
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

fn crypto_properties() -> Verdict {
    // exhaustive reconstruction from every qualified subset
    let scheme = ShamirScheme::default();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut reconstructions = 0;
    for n_shares in 1..=6usize {
        for t in 1..=n_shares {
            let secret = scheme.field().element(rng.gen::<u128>() >> 2);
            let shares = scheme
                .share(secret, t, n_shares, 0, ShareKind::Seed, &mut rng)
                .map_err(|e| e.to_string())?;
            for mask in 1u32..1 << n_shares {
                let subset: Vec<_> = (0..n_shares)
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| shares[k].clone())
                    .collect();
                if subset.len() < t {
                    continue;
                }
                for threshold in [Some(t), None] {
                    if scheme
                        .reconstruct(&subset, threshold)
                        .map_err(|e| e.to_string())?
                        != secret
                    {
                        return Err(format!(
                            "({t}, {n_shares}) subset {mask:b} failed to reconstruct"
                        ));
                    }
                    reconstructions += 1;
                }
            }
        }
    }
    // t-1 shares: every share vector arises from exactly one polynomial per secret
    let modulus = 7u128;
    let small = ShamirScheme::new(PrimeField::new(modulus).unwrap());
    let mut hiding_cases = 0;
    for t in 2..=3usize {
        for n_shares in t..=4 {
            let points: Vec<FieldElement> = (1..=n_shares as u128)
                .map(|x| small.field().element(x))
                .collect();
            let coeff_vectors = modulus.pow(t as u32 - 1);
            for seen_cols in subsets(&VertexSet::full(n_shares))
                .into_iter()
                .filter(|s| s.len() == t - 1)
            {
                let cols = seen_cols.to_vec();
                let mut histograms = Vec::new();
                for secret in 0..modulus {
                    let mut hist = std::collections::BTreeMap::<Vec<u128>, u32>::new();
                    for c in 0..coeff_vectors {
                        let script: Vec<u64> = (0..t - 1)
                            .flat_map(|k| {
                                let coeff = ((c / modulus.pow(k as u32)) % modulus) as u64;
                                [coeff, coeff]
                            })
                            .collect();
                        let values = small
                            .deal(
                                small.field().element(secret),
                                t,
                                &points,
                                &mut Scripted(script.into_iter()),
                            )
                            .map_err(|e| e.to_string())?;
                        *hist
                            .entry(cols.iter().map(|&k| values[k].value()).collect())
                            .or_default() += 1;
                    }
                    histograms.push(hist);
                }
                let uniform = histograms[0].len() as u128 == coeff_vectors
                    && histograms[0].values().all(|&c| c == 1);
                if !uniform || histograms.iter().any(|h| *h != histograms[0]) {
                    return Err(format!("t={t}, n={n_shares}, seen {cols:?}: share distribution depends on the secret"));
                }
                hiding_cases += 1;
            }
        }
    }
    let group = DhGroup::default();
    for _ in 0..100 {
        let (a, b) = (group.keygen(&mut rng), group.keygen(&mut rng));
        let ab = group
            .key_agree(b.public, a.secret)
            .map_err(|e| e.to_string())?;
        let ba = group
            .key_agree(a.public, b.secret)
            .map_err(|e| e.to_string())?;
        if ab != ba {
            return Err("key agreement is not symmetric".into());
        }
    }
    for case in 0..1000 {
        let key = PrgSeed::random(&mut rng);
        let len = rng.gen_range(0..64);
        let plaintext: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let nonce: [u8; 12] = rng.gen();
        let ct = ae_encrypt(&key, &plaintext, nonce);
        if ae_decrypt(&key, &ct).ok().as_deref() != Some(plaintext.as_slice()) {
            return Err(format!("case {case}: honest ciphertext rejected"));
        }
        let total_bits = 8 * (ct.nonce.len() + ct.body.len() + ct.tag.len());
        let bit = rng.gen_range(0..total_bits);
        let mut bad = ct.clone();
        let (byte, mask) = (bit / 8, 1u8 << (bit % 8));
        if byte < 12 {
            bad.nonce[byte] ^= mask;
        } else if byte < 12 + bad.body.len() {
            bad.body[byte - 12] ^= mask;
        } else {
            bad.tag[byte - 12 - ct.body.len()] ^= mask;
        }
        if ae_decrypt(&key, &bad).is_ok() {
            return Err(format!("case {case}: corrupted bit {bit} accepted"));
        }
    }
    Ok(format!(
        "{reconstructions} reconstructions, {hiding_cases} hiding patterns, 100 key pairs, 1000 corruptions rejected"
    ))
}

fn timing_trend() -> Verdict {
    let report = bench_timing(&BenchParams::new(100, 0.0)).map_err(|e| e.to_string())?;
    let p = report.rows[1].p;
    let summary = format!(
        "p={p:.3}: step-1 ratio {:.3}, step-2 ratio {:.3}, band [{:.3}, {:.3}]",
        report.step1_ratio,
        report.step2_ratio,
        p / 2.0,
        2.0 * p
    );
    if report.within_trend {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("p* table", pstar_table),
        ("t values", t_values),
        ("exact aggregation", exact_aggregation),
        ("oracle equivalence", oracle_equivalence),
        ("bound values", bound_values),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("cost accounting", cost_accounting),
        ("crypto properties", crypto_properties),
        ("timing trend", timing_trend),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("PASS {id} {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id} {name} ({secs:.1}s): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
