//! Community-aware weighted random walks.
//!
//! Each step draws `X ~ U[0,1)`. When `X <= alpha` the walk moves to an
//! out-neighbor chosen proportionally to edge weight, otherwise to a uniform
//! member of the current node's community (excluding the node itself). If the
//! chosen branch has no candidates the other branch is tried; if neither has
//! any, the walk ends early.

use alloc::vec::Vec;

use rand::Rng;

use crate::community::CommunityAssignment;
use crate::graph::{Graph, NodeId};
use crate::math::search_cumulative;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// Probability of a neighbor step.
    pub alpha: f64,
    /// Maximum walk length in nodes, start included.
    pub max_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            alpha: 0.2,
            max_length: 80,
            walks_per_node: 10,
            seed: 0,
        }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param("alpha", "must lie in [0, 1]"));
        }
        if self.max_length == 0 {
            return Err(Error::param("max_length", "must be at least 1"));
        }
        if self.walks_per_node == 0 {
            return Err(Error::param("walks_per_node", "must be at least 1"));
        }
        Ok(())
    }
}

/// Which branch a step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Neighbor,
    Community,
}

/// Walks in canonical order: start node ascending, then walk index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<NodeId>>,
    pub walks_per_node: usize,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }

    /// Occurrences of every node index below `node_count`.
    pub fn frequencies(&self, node_count: usize) -> Vec<u64> {
        let mut freq = alloc::vec![0u64; node_count];
        for &u in self.walks.iter().flatten() {
            if let Some(f) = freq.get_mut(u.index()) {
                *f += 1;
            }
        }
        freq
    }
}

/// Precomputed transition tables for one graph and partition.
pub struct Walker<'g> {
    graph: &'g Graph,
    communities: &'g CommunityAssignment,
    /// Per-arc running weight sums, aligned with the graph's CSR arrays.
    cumulative: Vec<f64>,
    offsets: Vec<usize>,
    params: WalkParams,
}

impl<'g> Walker<'g> {
    pub fn new(graph: &'g Graph, communities: &'g CommunityAssignment, params: WalkParams) -> Result<Self> {
        params.validate()?;
        communities.check_covers(graph)?;
        let mut cumulative = Vec::with_capacity(graph.arc_count());
        let mut offsets = Vec::with_capacity(graph.node_count() + 1);
        offsets.push(0);
        for u in graph.nodes() {
            let mut acc = 0.0;
            for &w in graph.adjacency(u).1 {
                acc += w;
                cumulative.push(acc);
            }
            offsets.push(cumulative.len());
        }
        Ok(Walker {
            graph,
            communities,
            cumulative,
            offsets,
            params,
        })
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    fn neighbor_step<R: Rng + ?Sized>(&self, current: NodeId, rng: &mut R) -> Option<NodeId> {
        let i = current.index();
        let cum = &self.cumulative[self.offsets[i]..self.offsets[i + 1]];
        let total = *cum.last()?;
        let pick = search_cumulative(cum, rng.gen::<f64>() * total);
        Some(self.graph.adjacency(current).0[pick])
    }

    fn community_step<R: Rng + ?Sized>(&self, current: NodeId, rng: &mut R) -> Option<NodeId> {
        let members = self.communities.members(self.communities.community_of(current));
        if members.len() < 2 {
            return None;
        }
        let own = members.binary_search(&current).ok()?;
        let mut pick = rng.gen_range(0..members.len() - 1);
        if pick >= own {
            pick += 1;
        }
        Some(members[pick])
    }

    /// One transition from `current`, reporting the branch that produced it.
    pub fn step_with_kind<R: Rng + ?Sized>(&self, current: NodeId, rng: &mut R) -> Option<(NodeId, StepKind)> {
        let x: f64 = rng.gen();
        let neighbor_first = x <= self.params.alpha;
        let (first, second) = if neighbor_first {
            (StepKind::Neighbor, StepKind::Community)
        } else {
            (StepKind::Community, StepKind::Neighbor)
        };
        for kind in [first, second] {
            let next = match kind {
                StepKind::Neighbor => self.neighbor_step(current, rng),
                StepKind::Community => self.community_step(current, rng),
            };
            if let Some(v) = next {
                return Some((v, kind));
            }
        }
        None
    }

    pub fn step<R: Rng + ?Sized>(&self, current: NodeId, rng: &mut R) -> Option<NodeId> {
        self.step_with_kind(current, rng).map(|(v, _)| v)
    }

    /// A walk from `start` of at most `max_length` nodes.
    pub fn walk<R: Rng + ?Sized>(&self, start: NodeId, rng: &mut R) -> Result<Vec<NodeId>> {
        self.graph.check(start)?;
        let mut walk = Vec::with_capacity(self.params.max_length);
        walk.push(start);
        let mut current = start;
        while walk.len() < self.params.max_length {
            match self.step(current, rng) {
                Some(next) => {
                    walk.push(next);
                    current = next;
                }
                None => break,
            }
        }
        Ok(walk)
    }

    /// Walk number `index` from `start`, on its own RNG stream. The result
    /// does not depend on which other walks were generated or in what order.
    pub fn seeded_walk(&self, start: NodeId, index: usize) -> Result<Vec<NodeId>> {
        let stream = start.0 as u64 * self.params.walks_per_node as u64 + index as u64;
        let mut rng = rng::stream(self.params.seed, stream);
        self.walk(start, &mut rng)
    }

    /// `walks_per_node` walks from every node, in canonical order.
    pub fn corpus(&self) -> WalkCorpus {
        let mut walks = Vec::with_capacity(self.graph.node_count() * self.params.walks_per_node);
        for start in self.graph.nodes() {
            for i in 0..self.params.walks_per_node {
                walks.push(self.seeded_walk(start, i).expect("start comes from the graph"));
            }
        }
        WalkCorpus {
            walks,
            walks_per_node: self.params.walks_per_node,
        }
    }
}

/// A single transition. See [`Walker::step`].
pub fn step<R: Rng + ?Sized>(
    g: &Graph,
    communities: &CommunityAssignment,
    current: NodeId,
    alpha: f64,
    rng: &mut R,
) -> Result<Option<NodeId>> {
    g.check(current)?;
    let params = WalkParams {
        alpha,
        max_length: 1,
        walks_per_node: 1,
        seed: 0,
    };
    Ok(Walker::new(g, communities, params)?.step(current, rng))
}

pub fn generate_walk<R: Rng + ?Sized>(
    g: &Graph,
    communities: &CommunityAssignment,
    start: NodeId,
    params: &WalkParams,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    Walker::new(g, communities, *params)?.walk(start, rng)
}

pub fn generate_corpus(g: &Graph, communities: &CommunityAssignment, params: &WalkParams) -> Result<WalkCorpus> {
    Ok(Walker::new(g, communities, *params)?.corpus())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use alloc::vec;

    fn chain() -> Graph {
        let mut b = GraphBuilder::new(true);
        b.add_edge("a", "b", 1.0).unwrap();
        b.add_edge("b", "c", 1.0).unwrap();
        b.build().0
    }

    #[test]
    fn forced_path_on_chain() {
        let g = chain();
        let a = CommunityAssignment::singletons(3);
        let p = WalkParams {
            alpha: 1.0,
            max_length: 3,
            walks_per_node: 1,
            seed: 5,
        };
        let mut rng = rng::from_seed(1);
        let walk = generate_walk(&g, &a, NodeId(0), &p, &mut rng).unwrap();
        assert_eq!(walk, vec![NodeId(0), NodeId(1), NodeId(2)]);
    }

    #[test]
    fn isolated_node_truncates_immediately() {
        let mut b = GraphBuilder::new(true);
        b.add_node("solo");
        let g = b.build().0;
        let a = CommunityAssignment::singletons(1);
        for alpha in [0.0, 0.5, 1.0] {
            let p = WalkParams {
                alpha,
                ..WalkParams::default()
            };
            let walk = generate_walk(&g, &a, NodeId(0), &p, &mut rng::from_seed(0)).unwrap();
            assert_eq!(walk, vec![NodeId(0)]);
        }
    }

    #[test]
    fn alpha_zero_with_lonely_community_and_no_edges_is_none() {
        let mut b = GraphBuilder::new(true);
        b.add_edge("x", "y", 1.0).unwrap();
        let g = b.build().0;
        // y is a sink and alone in its community
        let a = CommunityAssignment::singletons(2);
        let next = step(&g, &a, NodeId(1), 0.0, &mut rng::from_seed(3)).unwrap();
        assert_eq!(next, None);
    }

    #[test]
    fn alpha_zero_single_candidate() {
        let mut b = GraphBuilder::new(true);
        b.add_node("cur");
        b.add_node("x");
        let g = b.build().0;
        let a = CommunityAssignment::all_in_one(2);
        let mut rng = rng::from_seed(9);
        for _ in 0..100 {
            assert_eq!(step(&g, &a, NodeId(0), 0.0, &mut rng).unwrap(), Some(NodeId(1)));
        }
    }

    #[test]
    fn dead_end_falls_back_to_community() {
        let g = chain();
        let a = CommunityAssignment::all_in_one(3);
        // c has no out-edges, so even alpha = 1 must take a community step
        let next = step(&g, &a, NodeId(2), 1.0, &mut rng::from_seed(0)).unwrap();
        assert!(matches!(next, Some(NodeId(0)) | Some(NodeId(1))));
    }

    #[test]
    fn corpus_size_and_order() {
        let g = chain();
        let a = CommunityAssignment::all_in_one(3);
        let p = WalkParams {
            alpha: 0.5,
            max_length: 4,
            walks_per_node: 7,
            seed: 11,
        };
        let corpus = generate_corpus(&g, &a, &p).unwrap();
        assert_eq!(corpus.len(), 21);
        for (i, walk) in corpus.walks.iter().enumerate() {
            assert_eq!(walk[0], NodeId((i / 7) as u32));
            assert!(!walk.is_empty() && walk.len() <= 4);
        }
        assert_eq!(corpus, generate_corpus(&g, &a, &p).unwrap());
    }

    #[test]
    fn singleton_walks() {
        let g = chain();
        let a = CommunityAssignment::all_in_one(3);
        let p = WalkParams {
            alpha: 0.2,
            max_length: 1,
            walks_per_node: 1,
            seed: 0,
        };
        let corpus = generate_corpus(&g, &a, &p).unwrap();
        assert_eq!(corpus.walks, vec![vec![NodeId(0)], vec![NodeId(1)], vec![NodeId(2)]]);
    }

    #[test]
    fn rejects_invalid_params() {
        let g = chain();
        let a = CommunityAssignment::all_in_one(3);
        for p in [
            WalkParams {
                alpha: 1.5,
                ..WalkParams::default()
            },
            WalkParams {
                max_length: 0,
                ..WalkParams::default()
            },
            WalkParams {
                walks_per_node: 0,
                ..WalkParams::default()
            },
        ] {
            assert!(matches!(Walker::new(&g, &a, p), Err(Error::InvalidParameter { .. })));
        }
        let short = CommunityAssignment::all_in_one(2);
        assert!(Walker::new(&g, &short, WalkParams::default()).is_err());
    }

    #[test]
    fn unknown_start_errors() {
        let g = chain();
        let a = CommunityAssignment::all_in_one(3);
        let w = Walker::new(&g, &a, WalkParams::default()).unwrap();
        assert_eq!(w.seeded_walk(NodeId(3), 0), Err(Error::UnknownNode(3)));
    }
}
