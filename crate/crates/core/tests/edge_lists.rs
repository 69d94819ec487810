use std::path::{Path, PathBuf};

use ccesa::adversary::{exposed_subset, EavesdropperView};
use ccesa::graph::{
    privacy_predicate, reliability_predicate, AssignmentGraph, GraphEvolution, Thresholds,
};
use ccesa::protocol::{
    run_round, synthetic_models, DropoutSchedule, ProtocolParams, RoundConfig, RoundStatus,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load(name: &str) -> AssignmentGraph {
    AssignmentGraph::parse_edge_list(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

#[test]
fn fixtures_parse_and_round_trip() {
    for (name, n, edges) in [
        ("path3.txt", 3, 2),
        ("two_triangles.txt", 6, 6),
        ("star5.txt", 5, 4),
    ] {
        let g = load(name);
        assert_eq!((g.n(), g.edge_count()), (n, edges), "{name}");
        assert_eq!(
            AssignmentGraph::parse_edge_list(&g.to_edge_list()).unwrap(),
            g
        );
    }
}

#[test]
fn malformed_fixtures_are_rejected() {
    for name in ["out_of_range.txt", "self_loop.txt"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        assert!(AssignmentGraph::parse_edge_list(&text).is_err(), "{name}");
    }
}

#[test]
fn star_degrees() {
    let g = load("star5.txt");
    assert_eq!(g.degree(0), 4);
    assert!((1..5).all(|i| g.degree(i) == 1));
}

#[test]
fn disjoint_triangles_leak_each_triangle_sum() {
    let g = load("two_triangles.txt");
    let t = 2;
    let params = ProtocolParams::new(6, 0.4, 0.0, t, 3, 16);
    let models = synthetic_models(&params, 4);
    let outcome = run_round(
        params,
        g.clone(),
        &DropoutSchedule::none(6),
        models.clone(),
        4,
    )
    .unwrap();
    assert!(outcome.aggregate_correct());
    let evolution = GraphEvolution::all_survive(g);
    assert!(reliability_predicate(&evolution, &Thresholds::Uniform(t)));
    assert!(!privacy_predicate(&evolution, &Thresholds::Uniform(t)));
    let view = EavesdropperView::from_transcript(&outcome.transcript).unwrap();
    let exposed = exposed_subset(&view)
        .unwrap()
        .expect("a triangle is exposed");
    let members = exposed.to_vec();
    assert!(
        members == vec![0, 1, 2] || members == vec![3, 4, 5],
        "{members:?}"
    );
}

#[test]
fn config_file_drives_a_path_round() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let cfg = RoundConfig::parse(
        "graph = path3.txt\nt = 2\nm = 2\nr = 8\nseed = 1\n",
        &dir,
        0,
    )
    .unwrap();
    let rec = cfg.run().unwrap();
    assert_eq!(rec.n, 3);
    assert_eq!(rec.outcome, RoundStatus::Success);
    assert!(rec.reliable && rec.private);
}
