use ccesa::adversary::{
    partial_sum_attack, privacy_oracle, AttackError, EavesdropperView, MaskTerm, SymbolicMaskedSum,
};
use ccesa::graph::{
    privacy_predicate, reliability_predicate, AssignmentGraph, Thresholds, VertexSet,
};
use ccesa::protocol::{run_round, synthetic_models, DropoutSchedule, ProtocolParams, RoundOutcome};
use proptest::prelude::*;

/// A graph on `n` vertices from an edge bitmask plus a drop step per client.
fn instance() -> impl Strategy<Value = (usize, Vec<bool>, Vec<Option<u8>>, usize)> {
    (2usize..=8).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            Just(n),
            prop::collection::vec(any::<bool>(), pairs),
            prop::collection::vec(prop::option::weighted(0.25, 1u8..=4), n),
            1..=n,
        )
    })
}

fn build(n: usize, mask: &[bool]) -> AssignmentGraph {
    let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    AssignmentGraph::from_edges(n, pairs.zip(mask).filter(|(_, &b)| b).map(|(e, _)| e)).unwrap()
}

fn execute(n: usize, mask: &[bool], drops: Vec<Option<u8>>, t: usize, seed: u64) -> RoundOutcome {
    let graph = build(n, mask);
    let params = ProtocolParams::new(n, 0.5, 0.1, t, 3, 16);
    let schedule = DropoutSchedule::from_drop_steps(drops).unwrap();
    run_round(
        params,
        graph,
        &schedule,
        synthetic_models(&params, seed),
        seed,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decodes_exactly_when_reliable((n, mask, drops, t) in instance(), seed in any::<u64>()) {
        let outcome = execute(n, &mask, drops, t, seed);
        let reliable = reliability_predicate(&outcome.evolution, &Thresholds::Uniform(t));
        prop_assert_eq!(outcome.aggregate.is_some(), reliable);
        if reliable {
            prop_assert!(outcome.aggregate_correct());
        }
    }

    #[test]
    fn oracle_matches_privacy_predicate((n, mask, drops, t) in instance(), seed in any::<u64>()) {
        let outcome = execute(n, &mask, drops, t, seed);
        let view = EavesdropperView::from_transcript(&outcome.transcript).unwrap();
        let private = privacy_predicate(&outcome.evolution, &Thresholds::Uniform(t));
        prop_assert_eq!(privacy_oracle(&view).unwrap(), private);
    }

    #[test]
    fn successful_attacks_return_the_true_partial_sum(
        (n, mask, drops, t) in instance(),
        seed in any::<u64>(),
        pick in any::<u32>(),
    ) {
        let outcome = execute(n, &mask, drops, t, seed);
        let view = EavesdropperView::from_transcript(&outcome.transcript).unwrap();
        let v3 = view.v3().to_vec();
        let target = VertexSet::from_iter_n(n, v3.iter().enumerate().filter(|(k, _)| pick >> k & 1 == 1).map(|(_, &i)| i));
        let models = synthetic_models(&ProtocolParams::new(n, 0.5, 0.1, t, 3, 16), seed);
        match partial_sum_attack(&view, &target) {
            Ok(sum) => {
                let mut want = ccesa::crypto::ResidueVector::zeros(3, 16);
                for i in target.iter() {
                    want += &models[i];
                }
                prop_assert_eq!(sum, want);
            }
            Err(AttackError::TrivialSubset | AttackError::Uncancellable(_)) => {}
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn full_uploader_set_has_no_pairwise_terms((n, mask, _drops, t) in instance(), seed in any::<u64>()) {
        let outcome = execute(n, &mask, vec![None; n], t, seed);
        let view = EavesdropperView::from_transcript(&outcome.transcript).unwrap();
        let sum = SymbolicMaskedSum::expand(&view, view.v3());
        let pairwise = sum.nonzero_terms().filter(|(term, _)| matches!(term, MaskTerm::Pairwise { .. })).count();
        prop_assert_eq!(pairwise, 0);
    }
}
