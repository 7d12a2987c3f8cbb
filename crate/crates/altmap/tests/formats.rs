use std::path::Path;

use altmap::core::{ClusterAssignment, CoocGraph, RankedTerms, Thesaurus, TermKind};
use altmap::formats::*;
use altmap::Error;
use proptest::prelude::*;

fn label() -> impl Strategy<Value = String> {
    "[a-z#\"' éñ_0-9]{1,12}".prop_filter("non-blank", |s| !s.trim().is_empty())
}

fn graph() -> impl Strategy<Value = CoocGraph> {
    (1usize..25).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        (
            prop::collection::vec(label(), n),
            prop::collection::vec(prop::option::weighted(0.4, 0.0f64..=1.0), m),
        )
            .prop_map(move |(labels, weights)| {
                let edges = pairs.iter().zip(weights).filter_map(|(&(i, j), w)| w.map(|w| (i, j, w)));
                CoocGraph::from_similarities(labels, edges).unwrap()
            })
    })
}

fn p() -> &'static Path {
    Path::new("net.paj")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pajek_round_trips(g in graph()) {
        let text = write_pajek(&g);
        let back = parse_pajek(&text, p()).unwrap();
        prop_assert!(back.labels().eq(g.labels()));
        prop_assert_eq!(back.edges.len(), g.edges.len());
        for (a, b) in g.edges.iter().zip(&back.edges) {
            prop_assert_eq!((a.source, a.target), (b.source, b.target));
            prop_assert_eq!(format_weight(a.similarity), format_weight(b.similarity));
            prop_assert!((a.similarity - b.similarity).abs() <= 0.5e-4 + 1e-12);
        }
        prop_assert_eq!(write_pajek(&back), text);
    }

    #[test]
    fn map_rows_round_trip(g in graph(), seed in 0u64..1000) {
        let n = g.len();
        let positions: Vec<[f64; 2]> = (0..n).map(|i| [(i as f64 * 1.37 + seed as f64).sin() * 5.0, (i as f64).cos() * 3.0]).collect();
        let labels: Vec<usize> = (0..n).map(|i| 1 + i % 3.min(n)).collect();
        let clusters = ClusterAssignment { labels: labels.clone(), quality: 0.0 };
        let text = write_map(&g, &positions, &clusters).unwrap();
        let rows = parse_map(&text, Path::new("x.map.tsv")).unwrap();
        prop_assert_eq!(rows.labels, g.labels().map(String::from).collect::<Vec<_>>());
        prop_assert_eq!(rows.clusters, labels);
        for (a, b) in positions.iter().zip(&rows.positions) {
            prop_assert!((a[0] - b[0]).abs() <= 5e-7 && (a[1] - b[1]).abs() <= 5e-7);
        }
    }

    #[test]
    fn corpus_round_trips(docs in prop::collection::vec(prop::collection::vec("[a-z_#]{1,8}", 1..6), 0..20)) {
        let text = write_corpus(docs.iter().map(Vec::as_slice));
        prop_assert_eq!(parse_corpus(&text), docs);
    }
}

#[test]
fn golden_files_parse_back() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for name in ["triangle", "quoted_labels", "isolated"] {
        let path = dir.join(format!("{name}.paj"));
        let text = std::fs::read_to_string(&path).unwrap();
        let g = parse_pajek(&text, &path).unwrap();
        assert_eq!(write_pajek(&g), text, "{name}");
    }
}

#[test]
fn pajek_errors_carry_line_numbers() {
    let cases = [
        ("*Vertices 2\n0 \"a\"\n1 \"b\"\n*Edges\n", 2, "1-based"),
        ("*Vertices 2\n1 \"a\"\n2 \"b\"\n*Edges\n1 1 0.5\n", 5, "self-loop"),
        ("*Vertices 2\n1 \"a\"\n2 \"b\"\n*Edges\n1 2 0.5\n2 1 0.5\n", 6, "duplicate"),
        ("*Vertices 2\n1 \"a\"\n2 \"b\"\n*Edges\n1 2 1.5\n", 5, "outside"),
        ("*Vertices 2\n1 \"a\"\n2 b\n", 3, "quoted"),
        ("*Arcs\n", 1, "*Vertices"),
    ];
    for (text, want_line, needle) in cases {
        match parse_pajek(text, p()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, want_line, "{text:?}");
                assert!(message.contains(needle), "{message}");
            }
            other => panic!("{text:?}: {other:?}"),
        }
    }
    assert!(parse_pajek("*Vertices 2\n1 \"a\"\n*Edges\n", p()).is_err());
}

#[test]
fn sidecars_restore_counts_and_frequencies() {
    let docs: Vec<Vec<String>> = [&["a", "b"][..], &["a", "b", "c"], &["b", "c"], &["a"]]
        .iter()
        .map(|d| d.iter().map(|s| s.to_string()).collect())
        .collect();
    let set = altmap::core::TermSet { terms: ["a", "b", "c"].map(String::from).to_vec(), target: 3, threshold: None };
    let g = altmap::core::network::build_graph(&docs, &set, None).unwrap();
    let mut back = parse_pajek(&write_pajek(&g), p()).unwrap();
    assert!(back.nodes.iter().all(|n| n.frequency == 0));
    attach_sidecars(&mut back, Some((&write_nodes(&g), Path::new("n.tsv"))), Some((&write_edges(&g), Path::new("e.tsv")))).unwrap();
    assert_eq!(back.nodes, g.nodes);
    for (a, b) in g.edges.iter().zip(&back.edges) {
        assert_eq!(a.count, b.count);
    }
}

#[test]
fn frequencies_and_thesauri_round_trip() {
    let ranked = RankedTerms::from_counts([("sea_ice".to_string(), 5), ("arctic".to_string(), 5), ("co2".to_string(), 2)]);
    let back = parse_frequencies(&write_frequencies(&ranked), Path::new("f.tsv")).unwrap();
    assert_eq!(back, ranked);
    let th = Thesaurus::default_hashtags();
    let text = write_thesaurus(&th);
    let back = parse_thesaurus(&text, TermKind::Hashtag, Path::new("t")).unwrap();
    assert_eq!(back.rules().collect::<Vec<_>>(), th.rules().collect::<Vec<_>>());
}

#[test]
fn four_decimal_weights_round_ties_to_even() {
    assert_eq!(format_weight(0.03125), "0.0312");
    assert_eq!(format_weight(0.09375), "0.0938");
    assert_eq!(format_weight(1.0), "1.0000");
    assert_eq!(format_weight(2.0 / 3.0), "0.6667");
}
