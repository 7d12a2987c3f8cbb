//! Library results checked against brute-force implementations.

use altmap_core::cluster::{cluster_start, Problem};
use altmap_core::layout::{graph_distances, KkSystem};
use altmap_core::network::build_graph;
use altmap_core::{cluster, layout_kk, ClusterParams, CoocGraph, LayoutOptions, TermSet};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..30, 2usize..12).prop_flat_map(|(d, t)| prop::collection::vec(prop::collection::vec(any::<bool>(), t), d))
}

fn dense_graph(n: usize, weights: &[Option<u8>]) -> CoocGraph {
    let mut k = 0;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(w) = weights[k] {
                edges.push((i, j, f64::from(w) / 16.0));
            }
            k += 1;
        }
    }
    CoocGraph::from_similarities((0..n).map(|i| format!("t{i}")).collect(), edges).unwrap()
}

fn weighted_graph() -> impl Strategy<Value = CoocGraph> {
    (2usize..=8).prop_flat_map(|n| {
        prop::collection::vec(prop::option::of(1u8..=16), n * (n - 1) / 2).prop_map(move |w| dense_graph(n, &w))
    })
}

fn brute_optimum(sim: &[f64], n: usize, gamma: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut labels = vec![0usize; n];
    loop {
        let mut q = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                if labels[i] == labels[j] {
                    q += sim[i * n + j] - gamma;
                }
            }
        }
        best = best.max(q);
        // Next restricted growth string.
        let mut k = n;
        loop {
            if k == 1 {
                return best;
            }
            k -= 1;
            let max_prefix = labels[..k].iter().copied().max().unwrap_or(0);
            if labels[k] <= max_prefix {
                labels[k] += 1;
                for l in &mut labels[k + 1..] {
                    *l = 0;
                }
                break;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cosine_matches_column_cosine(m in matrix()) {
        let terms = m[0].len();
        let mut m = m;
        for t in 0..terms {
            if !m.iter().any(|r| r[t]) {
                let d = t % m.len();
                m[d][t] = true;
            }
        }
        let labels: Vec<String> = (0..terms).map(|t| format!("t{t}")).collect();
        let docs: Vec<Vec<String>> = m.iter().map(|r| (0..terms).filter(|&t| r[t]).map(|t| labels[t].clone()).collect()).collect();
        let set = TermSet { terms: labels, target: terms, threshold: None };
        let g = build_graph(&docs, &set, None).unwrap();
        for i in 0..terms {
            for j in (i + 1)..terms {
                let dot = m.iter().filter(|r| r[i] && r[j]).count() as f64;
                let ni = m.iter().filter(|r| r[i]).count() as f64;
                let nj = m.iter().filter(|r| r[j]).count() as f64;
                let want = dot / (ni.sqrt() * nj.sqrt());
                let got = g.edges.iter().find(|e| (e.source, e.target) == (i, j)).map_or(0.0, |e| e.similarity);
                prop_assert!((got - want).abs() <= 1e-12, "s({},{}) = {} vs {}", i, j, got, want);
                let count = g.edges.iter().find(|e| (e.source, e.target) == (i, j)).map_or(0, |e| e.count);
                prop_assert_eq!(count as f64, dot);
            }
        }
        for (k, node) in g.nodes.iter().enumerate() {
            prop_assert_eq!(node.frequency as usize, m.iter().filter(|r| r[k]).count());
        }
    }

    #[test]
    fn clustering_reaches_the_exhaustive_optimum(g in weighted_graph(), gamma in 1u8..12, seed in 0u64..1000) {
        let gamma = f64::from(gamma) / 16.0;
        let params = ClusterParams { resolution: gamma, min_cluster_size: 1, random_starts: 10, iterations: 10, seed, merge_small: false };
        let a = cluster(&g, &params).unwrap();
        let best = brute_optimum(&g.similarity_matrix(), g.len(), gamma);
        prop_assert_eq!(a.quality, best);
        prop_assert_eq!(Problem::new(&g).unwrap().quality(&a.labels, gamma), best);
    }

    #[test]
    fn every_start_is_no_worse_than_singletons(g in weighted_graph(), gamma in 1u8..16, start in 0usize..10) {
        let gamma = f64::from(gamma) / 16.0;
        let params = ClusterParams { resolution: gamma, merge_small: false, ..ClusterParams::default() };
        let a = cluster_start(&Problem::new(&g).unwrap(), &params, start);
        prop_assert!(a.quality >= 0.0);
        let mut seen: Vec<usize> = a.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen, (1..=a.n_clusters()).collect::<Vec<_>>());
    }

    #[test]
    fn gradient_matches_finite_differences(g in weighted_graph(), coords in prop::collection::vec(-4.0f64..4.0, 16)) {
        prop_assume!(g.components().len() == 1);
        let n = g.len();
        let sys = KkSystem::new(&g, 1.0).unwrap();
        let pos: Vec<[f64; 2]> = (0..n).map(|i| [coords[2 * i], coords[2 * i + 1]]).collect();
        let grad = sys.gradient(&pos);
        let h = 1e-5;
        let mut err = 0.0;
        let mut norm = 0.0;
        for k in 0..2 * n {
            let mut p = pos.clone();
            p[k / 2][k % 2] += h;
            let up = sys.energy(&p);
            p[k / 2][k % 2] -= 2.0 * h;
            let down = sys.energy(&p);
            let fd = (up - down) / (2.0 * h);
            err += (grad[k] - fd).powi(2);
            norm += fd * fd;
        }
        prop_assert!(err.sqrt() <= 1e-6 * norm.sqrt().max(1e-9), "relative error {}", err.sqrt() / norm.sqrt());
    }

    #[test]
    fn layout_never_raises_energy(g in weighted_graph(), seed in 0u64..100) {
        let l = layout_kk(&g, &LayoutOptions { seed, ..LayoutOptions::default() }).unwrap();
        prop_assert!(l.energy <= l.initial_energy);
        prop_assert_eq!(l.positions.len(), g.len());
    }
}

#[test]
fn distances_follow_inverse_similarity() {
    // a -0.5- b -0.25- c, plus a weak shortcut a -0.1- c (length 10).
    let g = CoocGraph::from_similarities(vec!["a".into(), "b".into(), "c".into()], [(0, 1, 0.5), (1, 2, 0.25), (0, 2, 0.1)]).unwrap();
    let d = graph_distances(&g);
    assert_eq!(d[1], 2.0);
    assert_eq!(d[2], 6.0);
    assert_eq!(d[5], 4.0);
}

#[test]
fn two_node_graph_reaches_ideal_distance() {
    for s in [1.0, 0.5, 0.2] {
        let g = CoocGraph::from_similarities(vec!["a".into(), "b".into()], [(0, 1, s)]).unwrap();
        let l = layout_kk(&g, &LayoutOptions::default()).unwrap();
        let [p, q] = [l.positions[0], l.positions[1]];
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        assert!((d - 1.0 / s).abs() <= 1e-6, "s = {s}: distance {d}");
    }
}
