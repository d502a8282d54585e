//! Louvain community detection on the undirected weighted view of a graph.
//!
//! Each level greedily moves nodes to the neighboring community with the
//! largest modularity gain (visiting nodes in a seeded random order), then
//! collapses communities into super-nodes. Levels repeat until a local-move
//! phase makes no change. The resolution is fixed at 1.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::graph::{Graph, NodeId};
use crate::{rng, Error, Result};

/// Gains below this are treated as no improvement.
const GAIN_EPSILON: f64 = 1e-12;
const MAX_SWEEPS_PER_LEVEL: usize = 1000;

/// A partition of the nodes into communities `0..C`.
///
/// Community ids are canonical: they are numbered in order of the lowest
/// node index they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    membership: Vec<u32>,
    members: Vec<Vec<NodeId>>,
}

impl CommunityAssignment {
    /// Builds an assignment from arbitrary per-node labels, renumbering them densely.
    pub fn from_labels(labels: &[u32]) -> Self {
        let mut remap: alloc::collections::BTreeMap<u32, u32> = alloc::collections::BTreeMap::new();
        let mut membership = Vec::with_capacity(labels.len());
        let mut members: Vec<Vec<NodeId>> = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            let next = remap.len() as u32;
            let c = *remap.entry(label).or_insert(next);
            if c as usize == members.len() {
                members.push(Vec::new());
            }
            members[c as usize].push(NodeId::from(i));
            membership.push(c);
        }
        CommunityAssignment { membership, members }
    }

    /// Every node in its own community.
    pub fn singletons(n: usize) -> Self {
        let labels: Vec<u32> = (0..n as u32).collect();
        Self::from_labels(&labels)
    }

    /// Every node in community 0.
    pub fn all_in_one(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    pub fn community_of(&self, u: NodeId) -> u32 {
        self.membership[u.index()]
    }

    /// Members of community `c`, ascending by node index.
    pub fn members(&self, c: u32) -> &[NodeId] {
        &self.members[c as usize]
    }

    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    /// Community sizes sorted descending.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.members.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    pub(crate) fn check_covers(&self, g: &Graph) -> Result<()> {
        if self.node_count() == g.node_count() {
            Ok(())
        } else {
            Err(Error::AssignmentMismatch {
                expected: g.node_count(),
                found: self.node_count(),
            })
        }
    }
}

/// Weighted modularity of `assignment` on the undirected view of `g`.
///
/// `Q = Σ_c [ in_c / 2m − (tot_c / 2m)² ]` where `in_c` sums the symmetric
/// adjacency over ordered pairs inside `c` and `tot_c` is the summed degree.
/// Edgeless graphs have `Q = 0`.
pub fn modularity(g: &Graph, assignment: &CommunityAssignment) -> Result<f64> {
    assignment.check_covers(g)?;
    let view = g.undirected_view();
    let c = assignment.community_count();
    let mut internal = vec![0.0; c];
    let mut total = vec![0.0; c];
    let mut two_m = 0.0;
    for (u, v, w) in view.arcs() {
        let cu = assignment.community_of(u) as usize;
        total[cu] += w;
        two_m += w;
        if cu == assignment.community_of(v) as usize {
            internal[cu] += w;
        }
    }
    if two_m == 0.0 {
        return Ok(0.0);
    }
    Ok(internal
        .iter()
        .zip(&total)
        .map(|(&i, &t)| i / two_m - (t / two_m) * (t / two_m))
        .sum())
}

/// Symmetric weighted adjacency used inside one Louvain level.
#[derive(Clone)]
struct Level {
    /// Neighbors `j != i` with `A_ij`.
    adjacency: Vec<Vec<(usize, f64)>>,
    /// `A_ii`: twice the weight folded into each super-node.
    loops: Vec<f64>,
    degree: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(view: &Graph) -> Self {
        let n = view.node_count();
        let mut adjacency = vec![Vec::new(); n];
        for u in view.nodes() {
            let (t, w) = view.adjacency(u);
            adjacency[u.index()] = t.iter().map(|v| v.index()).zip(w.iter().copied()).collect();
        }
        Self::with_loops(adjacency, vec![0.0; n])
    }

    fn with_loops(adjacency: Vec<Vec<(usize, f64)>>, loops: Vec<f64>) -> Self {
        let degree: Vec<f64> = adjacency
            .iter()
            .zip(&loops)
            .map(|(adj, &l)| l + adj.iter().map(|&(_, w)| w).sum::<f64>())
            .collect();
        let two_m = degree.iter().sum();
        Level {
            adjacency,
            loops,
            degree,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    /// Local-move phase. Returns the per-node community and whether anything moved.
    fn local_moves(&self, rng: &mut rng::Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        // Scratch: summed weight from the current node into each community.
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();

        let mut moved_any = false;
        for _ in 0..MAX_SWEEPS_PER_LEVEL {
            let mut moved = false;
            for &i in &order {
                let k_i = self.degree[i];
                if k_i == 0.0 {
                    continue;
                }
                let own = community[i];
                for &(j, w) in &self.adjacency[i] {
                    let c = community[j];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[own] -= k_i;

                let gain = |c: usize, link_c: f64| link_c - tot[c] * k_i / self.two_m;
                let mut best = own;
                let mut best_gain = gain(own, link[own]);
                // ascending ids + strict comparison: ties go to the lowest id,
                // and a node only leaves its community for a strict gain
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain + GAIN_EPSILON {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k_i;
                if best != own {
                    community[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (community, moved_any)
    }

    /// Collapses communities into super-nodes. `community` must be dense.
    fn aggregate(&self, community: &[usize], count: usize) -> Level {
        let mut loops = vec![0.0; count];
        let mut maps: Vec<alloc::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
        for i in 0..self.len() {
            let ci = community[i];
            loops[ci] += self.loops[i];
            for &(j, w) in &self.adjacency[i] {
                let cj = community[j];
                if ci == cj {
                    loops[ci] += w;
                } else {
                    *maps[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adjacency = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        Level::with_loops(adjacency, loops)
    }
}

/// Renumbers `labels` densely in order of first appearance.
fn compact(labels: &mut [usize]) -> usize {
    let mut remap = vec![usize::MAX; labels.len()];
    let mut next = 0;
    for l in labels.iter_mut() {
        if remap[*l] == usize::MAX {
            remap[*l] = next;
            next += 1;
        }
        *l = remap[*l];
    }
    next
}

/// Independent Louvain runs per call; the best partition is kept.
pub const DEFAULT_TRIALS: usize = 8;

/// Louvain modularity maximization with [`DEFAULT_TRIALS`] trials. Directed
/// graphs are symmetrized first.
pub fn louvain(g: &Graph, seed: u64) -> Result<CommunityAssignment> {
    louvain_trials(g, seed, DEFAULT_TRIALS)
}

/// Runs `trials` Louvain passes, each with its own node order derived from
/// `seed`, and returns the partition of highest modularity (earliest trial
/// on ties). A single pass is order-sensitive and can merge everything
/// early on star-like graphs.
pub fn louvain_trials(g: &Graph, seed: u64, trials: usize) -> Result<CommunityAssignment> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let view = g.undirected_view();
    let base = Level::from_graph(&view);
    if base.two_m == 0.0 {
        return Ok(CommunityAssignment::singletons(g.node_count()));
    }
    let mut best: Option<(f64, CommunityAssignment)> = None;
    for t in 0..trials {
        let a = single_pass(base.clone(), &mut rng::stream(seed, t as u64));
        let q = modularity(&view, &a)?;
        if best.as_ref().is_none_or(|(bq, _)| q > *bq + GAIN_EPSILON) {
            best = Some((q, a));
        }
    }
    Ok(best.expect("at least one trial").1)
}

fn single_pass(mut level: Level, rng: &mut rng::Rng) -> CommunityAssignment {
    // node -> current super-node
    let mut partition: Vec<usize> = (0..level.len()).collect();
    loop {
        let (mut community, moved) = level.local_moves(rng);
        if !moved {
            break;
        }
        let count = compact(&mut community);
        for p in partition.iter_mut() {
            *p = community[*p];
        }
        if count == level.len() {
            break;
        }
        level = level.aggregate(&community, count);
    }
    let labels: Vec<u32> = partition.iter().map(|&p| p as u32).collect();
    CommunityAssignment::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn graph(edges: &[(&str, &str)]) -> Graph {
        let mut b = GraphBuilder::new(false);
        for &(u, v) in edges {
            b.add_edge(u, v, 1.0).unwrap();
        }
        b.build().0
    }

    fn two_triangles() -> Graph {
        graph(&[("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")])
    }

    #[test]
    fn assignment_is_canonical() {
        let a = CommunityAssignment::from_labels(&[7, 3, 7, 9]);
        assert_eq!(a.membership(), &[0, 1, 0, 2]);
        assert_eq!(a.members(0), &[NodeId(0), NodeId(2)]);
        assert_eq!(a.community_count(), 3);
    }

    #[test]
    fn modularity_of_trivial_partition_is_zero() {
        let g = two_triangles();
        let q = modularity(&g, &CommunityAssignment::all_in_one(6)).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn modularity_of_two_triangles_is_half() {
        let g = two_triangles();
        let a = CommunityAssignment::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert!((modularity(&g, &a).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modularity_rejects_short_assignment() {
        let g = two_triangles();
        let err = modularity(&g, &CommunityAssignment::all_in_one(5)).unwrap_err();
        assert_eq!(err, Error::AssignmentMismatch { expected: 6, found: 5 });
    }

    #[test]
    fn louvain_splits_two_triangles() {
        let g = two_triangles();
        for seed in 0..10 {
            let a = louvain(&g, seed).unwrap();
            assert_eq!(a.membership(), &[0, 0, 0, 1, 1, 1]);
        }
    }

    #[test]
    fn louvain_single_node() {
        let mut b = GraphBuilder::new(true);
        b.add_node("x");
        let a = louvain(&b.build().0, 1).unwrap();
        assert_eq!(a.community_count(), 1);
    }

    #[test]
    fn louvain_empty_graph_errors() {
        let g = GraphBuilder::new(true).build().0;
        assert_eq!(louvain(&g, 0), Err(Error::EmptyGraph));
    }

    #[test]
    fn louvain_path_never_worse_than_trivial() {
        let g = graph(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f")]);
        for seed in 0..10 {
            let a = louvain(&g, seed).unwrap();
            assert!(modularity(&g, &a).unwrap() >= 0.0);
        }
    }
}
