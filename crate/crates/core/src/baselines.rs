//! Classical local-neighborhood link scores.
//!
//! Neighborhoods Γ(u) are taken from the undirected view (in- and
//! out-neighbors together) and edge weights are ignored.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::{Graph, NodeId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreKind {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    PreferentialAttachment,
    Sorensen,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 5] = [
        ScoreKind::CommonNeighbors,
        ScoreKind::Jaccard,
        ScoreKind::AdamicAdar,
        ScoreKind::PreferentialAttachment,
        ScoreKind::Sorensen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::CommonNeighbors => "common-neighbors",
            ScoreKind::Jaccard => "jaccard",
            ScoreKind::AdamicAdar => "adamic-adar",
            ScoreKind::PreferentialAttachment => "preferential-attachment",
            ScoreKind::Sorensen => "sorensen",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Sorted undirected neighbor sets, built once per graph.
#[derive(Debug, Clone)]
pub struct Neighborhoods {
    sets: Vec<Vec<NodeId>>,
}

impl Neighborhoods {
    pub fn new(g: &Graph) -> Self {
        let view = g.undirected_view();
        let sets = view.nodes().map(|u| view.adjacency(u).0.to_vec()).collect();
        Neighborhoods { sets }
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.sets
            .get(u.index())
            .map(Vec::as_slice)
            .ok_or(Error::UnknownNode(u.0))
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.sets[u.index()].len()
    }

    fn common(&self, a: &[NodeId], b: &[NodeId]) -> (usize, f64) {
        let (mut i, mut j) = (0, 0);
        let (mut count, mut adamic) = (0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    count += 1;
                    let k = self.degree(a[i]);
                    // degree-1 shared neighbors cannot occur for u != v, but ln 1 = 0 is skipped regardless
                    if k > 1 {
                        adamic += 1.0 / libm::log(k as f64);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        (count, adamic)
    }

    pub fn score(&self, u: NodeId, v: NodeId, kind: ScoreKind) -> Result<f64> {
        let a = self.neighbors(u)?;
        let b = self.neighbors(v)?;
        if u == v {
            return Err(Error::SelfPair);
        }
        let (cn, aa) = self.common(a, b);
        let (du, dv) = (a.len(), b.len());
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        Ok(match kind {
            ScoreKind::CommonNeighbors => cn as f64,
            ScoreKind::Jaccard => ratio(cn as f64, du + dv - cn),
            ScoreKind::AdamicAdar => aa,
            ScoreKind::PreferentialAttachment => (du * dv) as f64,
            ScoreKind::Sorensen => ratio(2.0 * cn as f64, du + dv),
        })
    }
}

/// Convenience wrapper that rebuilds the neighborhoods on every call; use
/// [`Neighborhoods`] when scoring many pairs.
pub fn local_score(g: &Graph, u: NodeId, v: NodeId, kind: ScoreKind) -> Result<f64> {
    Neighborhoods::new(g).score(u, v, kind)
}

/// Sorts by descending score, ties by ascending `(u, v)`.
pub fn rank_pairs(mut scored: Vec<(NodeId, NodeId, f64)>) -> Result<Vec<(NodeId, NodeId, f64)>> {
    if scored.iter().any(|s| s.2.is_nan()) {
        return Err(Error::NanScore);
    }
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use alloc::vec;

    /// Γ(u) = {a,b,c}, Γ(v) = {b,c,d}
    fn fixture() -> (Graph, NodeId, NodeId) {
        let mut b = GraphBuilder::new(true);
        for n in ["a", "b", "c"] {
            b.add_edge("u", n, 1.0).unwrap();
        }
        for n in ["b", "c", "d"] {
            b.add_edge(n, "v", 1.0).unwrap();
        }
        let g = b.build().0;
        let (u, v) = (g.node_id("u").unwrap(), g.node_id("v").unwrap());
        (g, u, v)
    }

    #[test]
    fn set_arithmetic_scores() {
        let (g, u, v) = fixture();
        let n = Neighborhoods::new(&g);
        assert_eq!(n.score(u, v, ScoreKind::CommonNeighbors).unwrap(), 2.0);
        assert_eq!(n.score(u, v, ScoreKind::Jaccard).unwrap(), 0.5);
        assert_eq!(n.score(u, v, ScoreKind::PreferentialAttachment).unwrap(), 9.0);
        assert!((n.score(u, v, ScoreKind::Sorensen).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // b and c both have degree 2
        let aa = n.score(u, v, ScoreKind::AdamicAdar).unwrap();
        assert!((aa - 2.0 / core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn empty_neighborhoods_score_zero() {
        let mut b = GraphBuilder::new(true);
        b.add_node("x");
        b.add_node("y");
        let g = b.build().0;
        for kind in ScoreKind::ALL {
            assert_eq!(local_score(&g, NodeId(0), NodeId(1), kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn errors() {
        let (g, u, _) = fixture();
        assert_eq!(local_score(&g, u, u, ScoreKind::Jaccard), Err(Error::SelfPair));
        assert_eq!(
            local_score(&g, u, NodeId(99), ScoreKind::Jaccard),
            Err(Error::UnknownNode(99))
        );
    }

    #[test]
    fn ranking() {
        let (a, b, c, d) = (NodeId(0), NodeId(1), NodeId(2), NodeId(3));
        let ranked = rank_pairs(vec![(a, b, 2.0), (c, d, 3.0)]).unwrap();
        assert_eq!(ranked, vec![(c, d, 3.0), (a, b, 2.0)]);
        let tied = rank_pairs(vec![(c, d, 1.0), (a, c, 1.0), (a, b, 1.0)]).unwrap();
        assert_eq!(tied, vec![(a, b, 1.0), (a, c, 1.0), (c, d, 1.0)]);
        assert!(rank_pairs(Vec::new()).unwrap().is_empty());
        assert_eq!(rank_pairs(vec![(a, b, f64::NAN)]), Err(Error::NanScore));
    }

    #[test]
    fn names_round_trip() {
        for k in ScoreKind::ALL {
            assert_eq!(ScoreKind::parse(k.as_str()), Some(k));
        }
    }
}
