use ccesa::adversary::unmasking_attack_feasible;
use ccesa::analysis::{p_star, t_rule};
use ccesa::graph::{gen_erdos_renyi, GraphEvolution};
use ccesa::harness::{monte_carlo, ExperimentConfig, ParameterGrid, TrialMode};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn within_three_sigma(rate: f64, bound: f64, trials: usize) -> bool {
    let b = bound.min(1.0);
    rate <= b + 3.0 * (b * (1.0 - b) / trials as f64).sqrt()
}

#[test]
fn empirical_rates_respect_bounds_across_sweep() {
    let trials = 400;
    let grid = ParameterGrid {
        n: vec![100, 200, 300],
        q_total: vec![0.0, 0.01, 0.05, 0.1],
        ..ParameterGrid::default()
    };
    let mut cfg = ExperimentConfig::new(grid, trials, 99);
    cfg.mode = TrialMode::Predicate;
    let result = monte_carlo(&cfg).unwrap();
    assert_eq!(result.cells.len(), 12);
    for c in &result.cells {
        if let Some(log10) = c.per_bound_log10 {
            let bound = 10f64.powf(log10);
            assert!(
                within_three_sigma(c.failure_rate, bound, trials),
                "n={} q_total={}: failure rate {} vs bound {bound}",
                c.cell.n,
                c.cell.q_total,
                c.failure_rate
            );
        }
        let pep = c.pep_bound_log10.map_or(0.0, |l| 10f64.powf(l));
        assert!(
            within_three_sigma(c.violation_rate, pep, trials),
            "n={} q_total={}: violation rate {} vs bound {pep}",
            c.cell.n,
            c.cell.q_total,
            c.violation_rate
        );
    }
}

#[test]
fn unmasking_attack_is_rare_at_the_design_point() {
    let n = 100;
    let p: f64 = p_star(n, 0.0).unwrap();
    let t = t_rule(n, p).unwrap();
    let graphs = 10_000;
    let mut rng = ChaCha20Rng::seed_from_u64(1234);
    let mut feasible = 0u64;
    for _ in 0..graphs {
        let evolution = GraphEvolution::all_survive(gen_erdos_renyi(n, p, &mut rng).unwrap());
        feasible += (0..n)
            .filter(|&i| unmasking_attack_feasible(i, &evolution, t))
            .count() as u64;
    }
    let samples = (graphs * n) as f64;
    let fraction = feasible as f64 / samples;
    let target = 1.0 / ((n - 1) as f64).powi(2);
    let tolerance = 3.0 * (target * (1.0 - target) / samples).sqrt();
    assert!(
        fraction <= target + tolerance,
        "fraction {fraction} vs {target} + {tolerance}"
    );
}
