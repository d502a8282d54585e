use std::collections::BTreeSet;

use linkpred_core::auc::{auc, AucMode};
use linkpred_core::baselines::{local_score, rank_pairs, Neighborhoods, ScoreKind};
use linkpred_core::embedding::EmbeddingMatrix;
use linkpred_core::features::{concat_features, hadamard_edge, FeatureMode, NodeFeatures};
use linkpred_core::split::{random_removal_split, temporal_split};
use linkpred_core::synthetic::stochastic_block_model;
use linkpred_core::{Graph, GraphBuilder, NodeId};
use proptest::prelude::*;

fn build(n: usize, directed: bool, edges: &[(usize, usize)]) -> Graph {
    let mut b = GraphBuilder::new(directed);
    for i in 0..n {
        b.add_node(&format!("v{i}"));
    }
    for &(u, v) in edges {
        b.add_edge_ids(NodeId::from(u), NodeId::from(v), 1.0).unwrap();
    }
    b.build().0
}

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = (usize, bool, Vec<(usize, usize)>)> {
    (2..=max_nodes, any::<bool>())
        .prop_flat_map(|(n, directed)| (Just(n), Just(directed), prop::collection::vec((0..n, 0..n), 0..n * n)))
}

fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for p in pos {
        for n in neg {
            s += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

/// Set-arithmetic oracle over undirected neighbor sets.
fn oracle(n: usize, edges: &[(usize, usize)], u: usize, v: usize, kind: ScoreKind) -> f64 {
    let mut gamma = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a != b {
            gamma[a].insert(b);
            gamma[b].insert(a);
        }
    }
    let inter: Vec<usize> = gamma[u].intersection(&gamma[v]).copied().collect();
    let union = gamma[u].union(&gamma[v]).count();
    let (du, dv) = (gamma[u].len(), gamma[v].len());
    match kind {
        ScoreKind::CommonNeighbors => inter.len() as f64,
        ScoreKind::Jaccard if union == 0 => 0.0,
        ScoreKind::Jaccard => inter.len() as f64 / union as f64,
        ScoreKind::AdamicAdar => inter
            .iter()
            .filter(|&&z| gamma[z].len() > 1)
            .map(|&z| 1.0 / libm::log(gamma[z].len() as f64))
            .sum(),
        ScoreKind::PreferentialAttachment => (du * dv) as f64,
        ScoreKind::Sorensen if du + dv == 0 => 0.0,
        ScoreKind::Sorensen => 2.0 * inter.len() as f64 / (du + dv) as f64,
    }
}

#[test]
fn sampled_auc_tracks_exact() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let lists = prop::collection::vec(0.0..1.0f64, 1..200);
    let mut close = 0;
    for seed in 0..50 {
        use proptest::strategy::ValueTree;
        let pos = lists.new_tree(&mut runner).unwrap().current();
        let neg = lists.new_tree(&mut runner).unwrap().current();
        let exact = auc(&pos, &neg, AucMode::Exact).unwrap();
        let sampled = auc(&pos, &neg, AucMode::Sampled { draws: 100_000, seed }).unwrap();
        if (exact - sampled).abs() < 0.01 {
            close += 1;
        }
    }
    assert!(close >= 48, "{close}/50");
}

#[test]
fn baseline_scores_on_an_sbm_are_symmetric_and_bounded() {
    let (g, _) = stochastic_block_model(&[15, 15], 0.4, 0.05, true, 2).unwrap();
    let nb = Neighborhoods::new(&g);
    for u in g.nodes() {
        for v in g.nodes().filter(|&v| v != u) {
            for kind in ScoreKind::ALL {
                assert_eq!(nb.score(u, v, kind).unwrap(), nb.score(v, u, kind).unwrap());
            }
            let j = nb.score(u, v, ScoreKind::Jaccard).unwrap();
            let s = nb.score(u, v, ScoreKind::Sorensen).unwrap();
            assert!((0.0..=1.0).contains(&j) && (0.0..=1.0).contains(&s));
        }
    }
}

#[test]
fn temporal_negatives_never_hit_either_snapshot() {
    let (g1, _) = stochastic_block_model(&[60, 60], 0.15, 0.02, true, 1).unwrap();
    let mut b = GraphBuilder::new(true);
    for (u, v, w) in g1.edges() {
        b.add_edge(g1.label(u).unwrap(), g1.label(v).unwrap(), w).unwrap();
    }
    let (extra, _) = stochastic_block_model(&[60, 60], 0.05, 0.01, true, 2).unwrap();
    for (u, v, w) in extra.edges() {
        b.add_edge(extra.label(u).unwrap(), extra.label(v).unwrap(), w).unwrap();
    }
    let g2 = b.build().0;
    let mut sampled = 0;
    for seed in 0..10 {
        let t = temporal_split(&g1, &g2, seed).unwrap();
        let s = &t.split;
        let in_g2 = |u: NodeId, v: NodeId| {
            let (a, b) = (
                g2.node_id(g1.label(u).unwrap()).unwrap(),
                g2.node_id(g1.label(v).unwrap()).unwrap(),
            );
            g2.has_edge(a, b)
        };
        s.check_invariants(true, |u, v| g1.has_edge(u, v) || in_g2(u, v))
            .unwrap();
        for &(u, v) in &s.positive_test {
            assert!(in_g2(u, v) && !g1.has_edge(u, v));
        }
        sampled += s.negative_train.len() + s.negative_test.len();
    }
    assert!(sampled >= 10_000, "{sampled}");
}

proptest! {
    #[test]
    fn exact_auc_matches_enumeration(
        pos in prop::collection::vec(prop_oneof![0.0..1.0f64, (0u8..4).prop_map(f64::from)], 1..20),
        neg in prop::collection::vec(prop_oneof![0.0..1.0f64, (0u8..4).prop_map(f64::from)], 1..20),
    ) {
        prop_assert_eq!(auc(&pos, &neg, AucMode::Exact).unwrap(), brute_auc(&pos, &neg));
    }

    #[test]
    fn auc_invariant_under_increasing_maps(
        pos in prop::collection::vec(-5.0..5.0f64, 1..60),
        neg in prop::collection::vec(-5.0..5.0f64, 1..60),
    ) {
        let f = |x: &f64| (x * 0.7).exp() * 3.0 - 1.0;
        let a = auc(&pos, &neg, AucMode::Exact).unwrap();
        let b = auc(&pos.iter().map(f).collect::<Vec<_>>(), &neg.iter().map(f).collect::<Vec<_>>(), AucMode::Exact).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let swapped = auc(&neg, &pos, AucMode::Exact).unwrap();
        prop_assert!((a + swapped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn baselines_match_set_oracle((n, directed, edges) in graph_strategy(6)) {
        let g = build(n, directed, &edges);
        let nb = Neighborhoods::new(&g);
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                for kind in ScoreKind::ALL {
                    let got = nb.score(NodeId::from(u), NodeId::from(v), kind).unwrap();
                    prop_assert_eq!(got, oracle(n, &edges, u, v, kind));
                    prop_assert_eq!(got, local_score(&g, NodeId::from(v), NodeId::from(u), kind).unwrap());
                }
                let cn = nb.score(NodeId::from(u), NodeId::from(v), ScoreKind::CommonNeighbors).unwrap();
                let j = nb.score(NodeId::from(u), NodeId::from(v), ScoreKind::Jaccard).unwrap();
                let gu: BTreeSet<_> = nb.neighbors(NodeId::from(u)).unwrap().iter().chain(nb.neighbors(NodeId::from(v)).unwrap()).collect();
                prop_assert!((cn - j * gu.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ranking_is_sorted_and_a_permutation(scores in prop::collection::vec((0u32..6, 0u32..6, 0u8..5), 0..30)) {
        let input: Vec<(NodeId, NodeId, f64)> = scores.iter().map(|&(u, v, s)| (NodeId(u), NodeId(v), s as f64)).collect();
        let ranked = rank_pairs(input.clone()).unwrap();
        prop_assert_eq!(ranked.len(), input.len());
        for w in ranked.windows(2) {
            prop_assert!(w[0].2 > w[1].2 || (w[0].2 == w[1].2 && (w[0].0, w[0].1) <= (w[1].0, w[1].1)));
        }
    }

    #[test]
    fn removal_splits_keep_their_invariants((n, directed, edges) in graph_strategy(12), fraction in 0.05..0.95f64, seed in any::<u64>()) {
        let g = build(n, directed, &edges);
        prop_assume!(g.edge_count() > 0);
        match random_removal_split(&g, fraction, seed) {
            Ok(s) => {
                let e = g.edge_count();
                let expected = ((fraction * e as f64 - 1e-9).ceil() as usize).clamp(1, e);
                prop_assert_eq!(s.positive_test.len(), expected);
                prop_assert_eq!(s.positive_train.len() + s.positive_test.len(), e);
                for &(u, v) in s.positive_train.iter().chain(&s.positive_test) {
                    prop_assert!(g.has_edge(u, v));
                }
                let check = s.check_invariants(directed, |u, v| g.has_edge(u, v));
                prop_assert!(check.is_ok(), "{:?}", check);
                prop_assert_eq!(&s, &random_removal_split(&g, fraction, seed).unwrap());
            }
            Err(linkpred_core::Error::NegativeSamplingExhausted { .. }) => {
                let pairs = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
                // rejection sampling may give up early only when non-edges are scarce
                prop_assert!(pairs - g.edge_count() < 2 * g.edge_count());
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn hadamard_properties(a in prop::collection::vec(-100.0..100.0f64, 0..20), seed in any::<u64>()) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x * ((seed >> (i % 60)) & 7) as f64 - 1.0).collect();
        prop_assert_eq!(hadamard_edge(&a, &b).unwrap(), hadamard_edge(&b, &a).unwrap());
        prop_assert_eq!(hadamard_edge(&a, &vec![1.0; a.len()]).unwrap(), a.clone());
        prop_assert!(hadamard_edge(&a, &vec![0.0; a.len()]).unwrap().iter().all(|&x| x == 0.0));
        prop_assert_eq!(hadamard_edge(&a, &b).unwrap().len(), a.len());
        prop_assert!(hadamard_edge(&a, &[1.0; 21]).is_err());
    }

    #[test]
    fn composed_features_put_structure_first(ds in 1usize..6, dc in 1usize..6, rows in 1usize..5) {
        let s: Vec<Vec<f64>> = (0..rows).map(|r| (0..ds).map(|j| (r * 10 + j) as f64).collect()).collect();
        let c: Vec<Vec<f64>> = (0..rows).map(|r| (0..dc).map(|j| -((r * 10 + j) as f64) - 1.0).collect()).collect();
        let s = EmbeddingMatrix::from_rows(ds, &s).unwrap();
        let c = EmbeddingMatrix::from_rows(dc, &c).unwrap();
        let both = NodeFeatures::compose(FeatureMode::Both, &s, Some(&c)).unwrap();
        prop_assert_eq!(both.dim(), ds + dc);
        for r in 0..rows {
            let u = NodeId::from(r);
            let f = concat_features(&s, Some(&c), u).unwrap();
            prop_assert_eq!(&f[..ds], s.row(r));
            prop_assert_eq!(&f[ds..], c.row(r));
            prop_assert_eq!(both.node(u).unwrap(), &f[..]);
            prop_assert_eq!(concat_features(&s, None, u).unwrap()[..ds].to_vec(), s.row(r).to_vec());
        }
        prop_assert_eq!(NodeFeatures::compose(FeatureMode::StructuralOnly, &s, Some(&c)).unwrap().dim(), ds);
        prop_assert_eq!(NodeFeatures::compose(FeatureMode::ContentOnly, &s, Some(&c)).unwrap().dim(), dc);
    }

    #[test]
    fn graph_views_are_stable((n, directed, edges) in graph_strategy(10)) {
        let g = build(n, directed, &edges);
        let view = g.undirected_view();
        prop_assert_eq!(&view, &view.undirected_view());
        prop_assert!(!view.is_directed());
        // rebuilding from the stored edges reproduces the graph
        let mut b = GraphBuilder::new(directed);
        for l in g.labels() {
            b.add_node(l);
        }
        for (u, v, w) in g.edges() {
            b.add_edge_ids(u, v, w).unwrap();
        }
        let (again, report) = b.build();
        prop_assert_eq!(&again, &g);
        prop_assert_eq!(report.duplicates_merged, 0);
        prop_assert_eq!(g.edges().count(), g.edge_count());
        for (u, v, _) in g.arcs() {
            prop_assert!(u != v);
            if !directed {
                prop_assert!(g.has_edge(v, u));
            }
        }
        prop_assert_eq!(g.without_edges(&[]), g.clone());
    }
}
