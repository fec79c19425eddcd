use std::path::PathBuf;

use proptest::prelude::*;

use qbg_core::analytic::{phase_grid, ObjectiveKind};
use qbg_core::io::{
    format_biadjacency, format_edge_list, format_partition_csv, format_phase_grid, parse_biadjacency,
    parse_edge_list, parse_partition_csv, parse_phase_grid, read_biadjacency, read_edge_list, read_record,
    write_record, EdgeListOptions, InputDescriptor, LabeledGraph, RunRecord,
};
use qbg_core::sweep::{sweep_chi, SweepConfig};
use qbg_core::{BipartiteGraph, Partition};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn southern_women_formats_agree() {
    let edges = read_edge_list(&fixture("southern_women.tsv"), EdgeListOptions::default()).unwrap();
    let matrix = read_biadjacency(&fixture("southern_women_biadjacency.csv")).unwrap();
    assert_eq!((edges.graph.red_count(), edges.graph.blue_count()), (18, 14));
    assert_eq!(edges.graph.edge_count(), 89);
    assert_eq!(edges.red_labels, matrix.red_labels);

    // event columns may come in a different order than first attendance
    let column: Vec<usize> = edges
        .blue_labels
        .iter()
        .map(|l| matrix.blue_labels.iter().position(|m| m == l).unwrap())
        .collect();
    let mut from_edges: Vec<(usize, usize)> = edges.graph.edges().iter().map(|e| (e.red, column[e.blue])).collect();
    let mut from_matrix: Vec<(usize, usize)> = matrix.graph.edges().iter().map(|e| (e.red, e.blue)).collect();
    from_edges.sort_unstable();
    from_matrix.sort_unstable();
    assert_eq!(from_edges, from_matrix);
}

fn labeled_strategy() -> impl Strategy<Value = LabeledGraph> {
    (1usize..6, 1usize..6)
        .prop_flat_map(|(r, b)| {
            (
                Just(r),
                Just(b),
                proptest::collection::vec(proptest::option::weighted(0.5, 0.01f64..100.0), r * b),
            )
        })
        .prop_map(|(r, b, cells)| {
            let edges: Vec<(usize, usize, f64)> = cells
                .into_iter()
                .enumerate()
                .filter_map(|(i, w)| w.map(|w| (i / b, i % b, w)))
                .collect();
            LabeledGraph {
                graph: BipartiteGraph::new(r, b, edges).unwrap(),
                red_labels: (0..r).map(|i| format!("woman {i}")).collect(),
                blue_labels: (0..b).map(|j| format!("event,{j}")).collect(),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn biadjacency_round_trip(l in labeled_strategy()) {
        let back = parse_biadjacency(&format_biadjacency(&l).unwrap()).unwrap();
        prop_assert_eq!(&back.red_labels, &l.red_labels);
        prop_assert_eq!(&back.blue_labels, &l.blue_labels);
        prop_assert_eq!(back.graph.edges(), l.graph.edges());
    }

    #[test]
    fn edge_list_round_trip(l in labeled_strategy()) {
        // isolated nodes cannot appear in an edge list
        prop_assume!(l.graph.edge_count() > 0);
        let back = parse_edge_list(&format_edge_list(&l), EdgeListOptions::default()).unwrap();
        let name = |labels: &[String], i: usize| labels[i].clone();
        let mut a: Vec<(String, String, u64)> = l.graph.edges().iter()
            .map(|e| (name(&l.red_labels, e.red), name(&l.blue_labels, e.blue), e.weight.to_bits()))
            .collect();
        let mut b: Vec<(String, String, u64)> = back.graph.edges().iter()
            .map(|e| (name(&back.red_labels, e.red), name(&back.blue_labels, e.blue), e.weight.to_bits()))
            .collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn partition_csv_round_trip(l in labeled_strategy(), seed in proptest::collection::vec(0usize..4, 12)) {
        let n = l.graph.node_count();
        let p = Partition::from_labels(&seed[..n]);
        let text = format_partition_csv(&l, &p).unwrap();
        prop_assert_eq!(parse_partition_csv(&text, &l).unwrap(), p);
    }

    #[test]
    fn phase_grid_round_trip(chi in -1.0f64..3.0, t in 0.0f64..1e4, np in 1usize..5, nd in 1usize..5) {
        let p_axis: Vec<f64> = (1..=np).map(|i| i as f64 / np as f64).collect();
        let d_axis: Vec<f64> = (0..nd).map(|i| (i as f64 + 0.5) / nd as f64).collect();
        let grid = phase_grid(ObjectiveKind::Qbg, chi, t, &p_axis, &d_axis);
        let back = parse_phase_grid(&format_phase_grid(&grid), grid.objective, chi, t).unwrap();
        prop_assert_eq!(back, grid);
    }
}

#[test]
fn sweep_record_round_trip_on_fixture() {
    let path = fixture("southern_women.tsv");
    let l = read_edge_list(&path, EdgeListOptions::default()).unwrap();
    let config = SweepConfig::default();
    let profile = sweep_chi(&l.graph, -0.5, 1.5, 5, &config).unwrap();
    let record = RunRecord::from_profile(InputDescriptor::from_file(&path).unwrap(), config, &l, &profile);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    write_record(&out, &record).unwrap();
    let back = read_record(&out).unwrap();
    assert_eq!(back, record);
    back.validate(&l.graph).unwrap();
}
