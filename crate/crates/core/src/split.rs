//! Train/test datasets of labelled node pairs.
//!
//! Negative pairs are drawn uniformly over ordered node pairs (unordered for
//! undirected graphs) with rejection; a draw is rejected when it is a
//! self-pair, an edge of any reference snapshot, or already used by any set.
//! Sampling gives up after `100 × required` attempts.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Graph, NodeId};
use crate::{rng, Error, Result};

pub type Pair = (NodeId, NodeId);

const RETRY_FACTOR: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetSplit {
    pub positive_train: Vec<Pair>,
    pub negative_train: Vec<Pair>,
    pub positive_test: Vec<Pair>,
    pub negative_test: Vec<Pair>,
}

impl DatasetSplit {
    pub fn train(&self) -> (Vec<Pair>, Vec<u8>) {
        labelled(&self.positive_train, &self.negative_train)
    }

    pub fn test(&self) -> (Vec<Pair>, Vec<u8>) {
        labelled(&self.positive_test, &self.negative_test)
    }

    /// Checks the size, disjointness and non-edge invariants. `is_edge`
    /// reports whether a pair is a link in any snapshot.
    pub fn check_invariants<F>(&self, directed: bool, is_edge: F) -> core::result::Result<(), &'static str>
    where
        F: Fn(NodeId, NodeId) -> bool,
    {
        if self.negative_train.len() != self.positive_train.len() {
            return Err("negative_train and positive_train differ in size");
        }
        if self.negative_test.len() != self.positive_test.len() {
            return Err("negative_test and positive_test differ in size");
        }
        let mut seen = BTreeSet::new();
        for set in [
            &self.positive_train,
            &self.negative_train,
            &self.positive_test,
            &self.negative_test,
        ] {
            for &pair in set.iter() {
                if !seen.insert(key(pair, directed)) {
                    return Err("a pair appears twice");
                }
            }
        }
        for &(u, v) in self.negative_train.iter().chain(&self.negative_test) {
            if u == v {
                return Err("self pair among negatives");
            }
            if is_edge(u, v) || (!directed && is_edge(v, u)) {
                return Err("negative pair is an edge");
            }
        }
        Ok(())
    }
}

fn labelled(pos: &[Pair], neg: &[Pair]) -> (Vec<Pair>, Vec<u8>) {
    let pairs = pos.iter().chain(neg).copied().collect();
    let labels = core::iter::repeat_n(1, pos.len())
        .chain(core::iter::repeat_n(0, neg.len()))
        .collect();
    (pairs, labels)
}

fn key((u, v): Pair, directed: bool) -> (u32, u32) {
    if directed || u <= v {
        (u.0, v.0)
    } else {
        (v.0, u.0)
    }
}

/// Rejection sampler over the pairs of `n` nodes.
struct NegativeSampler {
    n: usize,
    directed: bool,
    forbidden: BTreeSet<(u32, u32)>,
}

impl NegativeSampler {
    fn new(n: usize, directed: bool) -> Self {
        NegativeSampler {
            n,
            directed,
            forbidden: BTreeSet::new(),
        }
    }

    fn forbid(&mut self, pair: Pair) {
        self.forbidden.insert(key(pair, self.directed));
    }

    fn sample<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) -> Result<Vec<Pair>> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return Ok(out);
        }
        if self.n < 2 {
            return Err(Error::NegativeSamplingExhausted {
                needed: count,
                found: 0,
            });
        }
        let mut attempts = 0;
        while out.len() < count {
            if attempts >= RETRY_FACTOR * count {
                return Err(Error::NegativeSamplingExhausted {
                    needed: count,
                    found: out.len(),
                });
            }
            attempts += 1;
            let u = NodeId::from(rng.gen_range(0..self.n));
            let v = NodeId::from(rng.gen_range(0..self.n));
            if u == v {
                continue;
            }
            let (u, v) = if self.directed || u < v { (u, v) } else { (v, u) };
            if self.forbidden.insert(key((u, v), self.directed)) {
                out.push((u, v));
            }
        }
        Ok(out)
    }
}

/// Random-removal split: `⌈fraction·|E|⌉` edges become positive test pairs,
/// the rest positive training pairs.
pub fn random_removal_split(g: &Graph, test_fraction: f64, seed: u64) -> Result<DatasetSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param("test_fraction", "must lie strictly between 0 and 1"));
    }
    let mut edges: Vec<Pair> = g.edges().map(|(u, v, _)| (u, v)).collect();
    if edges.is_empty() {
        return Err(Error::EmptyInput("edges"));
    }
    let mut rng = rng::from_seed(seed);
    edges.shuffle(&mut rng);
    // guard against products like 0.1 * 100 landing just above an integer
    let test_count = (libm::ceil(test_fraction * edges.len() as f64 - 1e-9) as usize).clamp(1, edges.len());
    let mut positive_test = edges[..test_count].to_vec();
    let mut positive_train = edges[test_count..].to_vec();
    positive_test.sort_unstable();
    positive_train.sort_unstable();

    let mut sampler = NegativeSampler::new(g.node_count(), g.is_directed());
    for &e in &edges {
        sampler.forbid(e);
    }
    let negative_train = sampler.sample(positive_train.len(), &mut rng)?;
    let negative_test = sampler.sample(positive_test.len(), &mut rng)?;
    Ok(DatasetSplit {
        positive_train,
        negative_train,
        positive_test,
        negative_test,
    })
}

/// A temporal split plus the number of new edges skipped because an
/// endpoint does not exist in the first snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalSplit {
    pub split: DatasetSplit,
    pub dropped_unseen: usize,
}

/// Temporal split: edges of `earlier` train, edges new in `later` test.
/// Pairs are expressed in `earlier`'s node ids; negatives are drawn over
/// `earlier`'s nodes and avoid edges of both snapshots.
pub fn temporal_split(earlier: &Graph, later: &Graph, seed: u64) -> Result<TemporalSplit> {
    let directed = earlier.is_directed();
    let positive_train: Vec<Pair> = earlier.edges().map(|(u, v, _)| (u, v)).collect();
    let mut sampler = NegativeSampler::new(earlier.node_count(), directed);
    for &e in &positive_train {
        sampler.forbid(e);
    }

    let mut dropped_unseen = 0;
    let mut positive_test = Vec::new();
    for (u, v, _) in later.edges() {
        let mapped = (earlier.node_id(later.label(u)?), earlier.node_id(later.label(v)?));
        match mapped {
            (Some(a), Some(b)) => {
                let (a, b) = if directed || a < b { (a, b) } else { (b, a) };
                sampler.forbid((a, b));
                let known = earlier.has_edge(a, b) || (!directed && earlier.has_edge(b, a));
                if !known {
                    positive_test.push((a, b));
                }
            }
            _ => dropped_unseen += 1,
        }
    }
    if positive_test.is_empty() {
        return Err(Error::NoNewEdges);
    }
    positive_test.sort_unstable();
    positive_test.dedup();

    let mut rng = rng::from_seed(seed);
    let negative_train = sampler.sample(positive_train.len(), &mut rng)?;
    let negative_test = sampler.sample(positive_test.len(), &mut rng)?;
    Ok(TemporalSplit {
        split: DatasetSplit {
            positive_train,
            negative_train,
            positive_test,
            negative_test,
        },
        dropped_unseen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use alloc::vec;

    fn graph(directed: bool, edges: &[(&str, &str)], extra_nodes: &[&str]) -> Graph {
        let mut b = GraphBuilder::new(directed);
        for &(u, v) in edges {
            b.add_edge(u, v, 1.0).unwrap();
        }
        for n in extra_nodes {
            b.add_node(n);
        }
        b.build().0
    }

    #[test]
    fn temporal_set_difference() {
        let g1 = graph(true, &[("a", "b")], &["c"]);
        let g2 = graph(true, &[("a", "b"), ("b", "c")], &[]);
        let t = temporal_split(&g1, &g2, 1).unwrap();
        let id = |s| g1.node_id(s).unwrap();
        assert_eq!(t.split.positive_train, vec![(id("a"), id("b"))]);
        assert_eq!(t.split.positive_test, vec![(id("b"), id("c"))]);
        assert_eq!(t.split.negative_train.len(), 1);
        assert_eq!(t.split.negative_test.len(), 1);
        t.split
            .check_invariants(true, |u, v| g1.has_edge(u, v) || (u, v) == (id("b"), id("c")))
            .unwrap();
    }

    #[test]
    fn temporal_identical_snapshots_error() {
        let g = graph(true, &[("a", "b"), ("b", "c")], &["d"]);
        assert_eq!(temporal_split(&g, &g, 0), Err(Error::NoNewEdges));
    }

    #[test]
    fn temporal_drops_unseen_endpoints() {
        let g1 = graph(true, &[("a", "b"), ("b", "c")], &["d", "e", "f"]);
        let g2 = graph(true, &[("a", "b"), ("c", "d"), ("x", "a")], &[]);
        let t = temporal_split(&g1, &g2, 0).unwrap();
        assert_eq!(t.dropped_unseen, 1);
        assert_eq!(t.split.positive_test.len(), 1);
    }

    #[test]
    fn removal_sizes() {
        let edges: Vec<(alloc::string::String, alloc::string::String)> = (0..100)
            .map(|i| (alloc::format!("n{i}"), alloc::format!("n{}", (i * 7 + 3) % 100)))
            .collect();
        let mut b = GraphBuilder::new(true);
        for (u, v) in &edges {
            b.add_edge(u, v, 1.0).unwrap();
        }
        let g = b.build().0;
        assert_eq!(g.edge_count(), 100);
        let s = random_removal_split(&g, 0.1, 4).unwrap();
        assert_eq!(s.positive_test.len(), 10);
        assert_eq!(s.positive_train.len(), 90);
        assert_eq!(s, random_removal_split(&g, 0.1, 4).unwrap());
        s.check_invariants(true, |u, v| g.has_edge(u, v)).unwrap();
    }

    #[test]
    fn removal_rejects_bad_fraction() {
        let g = graph(true, &[("a", "b")], &["c"]);
        for f in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                random_removal_split(&g, f, 0),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn complete_graph_exhausts_negatives() {
        let names = ["a", "b", "c", "d"];
        let mut edges = Vec::new();
        for u in names {
            for v in names {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
        let g = graph(true, &edges, &[]);
        assert!(matches!(
            random_removal_split(&g, 0.5, 0),
            Err(Error::NegativeSamplingExhausted { .. })
        ));
    }

    #[test]
    fn undirected_negatives_respect_reverse_orientation() {
        let g = graph(false, &[("a", "b"), ("b", "c"), ("c", "d")], &["e", "f"]);
        for seed in 0..50 {
            let s = random_removal_split(&g, 0.3, seed).unwrap();
            s.check_invariants(false, |u, v| g.has_edge(u, v)).unwrap();
        }
    }
}
