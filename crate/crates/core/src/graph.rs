//! Weighted graphs with string-labelled nodes stored as compressed adjacency.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Dense internal node index in `[0, |V|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What happened while a graph was assembled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nodes={} edges={} self_loops_dropped={} duplicates_merged={}",
            self.nodes, self.edges, self.self_loops_dropped, self.duplicates_merged
        )
    }
}

/// Immutable weighted graph.
///
/// Out-adjacency is kept in CSR form with each node's targets sorted by
/// index. Undirected graphs store every edge in both directions, so
/// `arc_count() == 2 * edge_count()` for them.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    directed: bool,
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
}

impl Graph {
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of stored adjacency entries.
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// `|E|`: arcs for directed graphs, unordered pairs for undirected ones.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.targets.len()
        } else {
            self.targets.len() / 2
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + DoubleEndedIterator + '_ {
        (0..self.labels.len()).map(NodeId::from)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, u: NodeId) -> Result<&str> {
        self.labels
            .get(u.index())
            .map(String::as_str)
            .ok_or(Error::UnknownNode(u.0))
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.labels.len()
    }

    pub(crate) fn check(&self, u: NodeId) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::UnknownNode(u.0))
        }
    }

    /// Out-neighbors of `u` with weights, ascending by target index.
    pub fn out_neighbors(&self, u: NodeId) -> Result<Neighbors<'_>> {
        self.check(u)?;
        let (t, w) = self.adjacency(u);
        Ok(Neighbors {
            targets: t.iter(),
            weights: w.iter(),
        })
    }

    /// Raw target and weight slices of `u`. Panics on an unknown node.
    #[inline]
    pub fn adjacency(&self, u: NodeId) -> (&[NodeId], &[f64]) {
        let range = self.offsets[u.index()]..self.offsets[u.index() + 1];
        (&self.targets[range.clone()], &self.weights[range])
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        let i = u.index();
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Weight of arc `u -> v`, if present.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        if !self.contains(u) {
            return None;
        }
        let (t, w) = self.adjacency(u);
        t.binary_search(&v).ok().map(|i| w[i])
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edge_weight(u, v).is_some()
    }

    /// Every stored arc `(u, v, w)`, including both directions of undirected edges.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.nodes().flat_map(move |u| {
            let (t, w) = self.adjacency(u);
            t.iter().zip(w).map(move |(&v, &wt)| (u, v, wt))
        })
    }

    /// Every edge once: all arcs when directed, `u < v` pairs when undirected.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let directed = self.directed;
        self.arcs().filter(move |&(u, v, _)| directed || u < v)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Symmetric copy where `w(u,v) = w(v,u) = w_dir(u,v) + w_dir(v,u)`.
    /// Undirected graphs are returned unchanged.
    pub fn undirected_view(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        let mut builder = self.empty_like(false);
        for (u, v, w) in self.arcs() {
            builder
                .add_edge_ids(u, v, w)
                .expect("weights were validated on construction");
        }
        builder.build().0
    }

    /// Same node set with the listed edges removed. For undirected graphs
    /// either orientation of a pair removes the edge.
    pub fn without_edges(&self, removed: &[(NodeId, NodeId)]) -> Graph {
        let mut drop: alloc::collections::BTreeSet<(NodeId, NodeId)> = removed.iter().copied().collect();
        if !self.directed {
            drop.extend(removed.iter().map(|&(u, v)| (v, u)));
        }
        let mut builder = self.empty_like(self.directed);
        for (u, v, w) in self.edges() {
            if !drop.contains(&(u, v)) {
                builder
                    .add_edge_ids(u, v, w)
                    .expect("weights were validated on construction");
            }
        }
        builder.build().0
    }

    /// A builder pre-populated with this graph's nodes (same indices).
    fn empty_like(&self, directed: bool) -> GraphBuilder {
        let mut builder = GraphBuilder::new(directed);
        for label in &self.labels {
            builder.add_node(label);
        }
        builder
    }
}

/// Iterator over `(target, weight)` pairs of one node.
pub struct Neighbors<'a> {
    targets: core::slice::Iter<'a, NodeId>,
    weights: core::slice::Iter<'a, f64>,
}

impl Iterator for Neighbors<'_> {
    type Item = (NodeId, f64);

    fn next(&mut self) -> Option<Self::Item> {
        Some((*self.targets.next()?, *self.weights.next()?))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.targets.size_hint()
    }
}

impl ExactSizeIterator for Neighbors<'_> {}

/// Incremental graph construction.
///
/// Self-loops are dropped and duplicate edges merged by summing weights;
/// both are counted in the [`LoadReport`] returned by [`GraphBuilder::build`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    directed: bool,
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId, f64)>,
    self_loops: usize,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> Self {
        GraphBuilder {
            directed,
            labels: Vec::new(),
            index: BTreeMap::new(),
            edges: Vec::new(),
            self_loops: 0,
        }
    }

    /// Registers `label` (idempotent) and returns its index.
    pub fn add_node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = NodeId::from(self.labels.len());
        self.labels.push(String::from(label));
        self.index.insert(String::from(label), id);
        id
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, weight: f64) -> Result<()> {
        check_weight(weight)?;
        let u = self.add_node(src);
        let v = self.add_node(dst);
        self.push(u, v, weight);
        Ok(())
    }

    /// Adds an edge between already registered nodes.
    pub fn add_edge_ids(&mut self, u: NodeId, v: NodeId, weight: f64) -> Result<()> {
        check_weight(weight)?;
        for n in [u, v] {
            if n.index() >= self.labels.len() {
                return Err(Error::UnknownNode(n.0));
            }
        }
        self.push(u, v, weight);
        Ok(())
    }

    fn push(&mut self, u: NodeId, v: NodeId, weight: f64) {
        if u == v {
            self.self_loops += 1;
            return;
        }
        let (a, b) = if self.directed || u < v { (u, v) } else { (v, u) };
        self.edges.push((a, b, weight));
    }

    pub fn build(self) -> (Graph, LoadReport) {
        let GraphBuilder {
            directed,
            labels,
            index,
            mut edges,
            self_loops,
        } = self;

        edges.sort_by_key(|x| (x.0, x.1));
        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(edges.len());
        let mut duplicates = 0;
        for (u, v, w) in edges {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => {
                    last.2 += w;
                    duplicates += 1;
                }
                _ => merged.push((u, v, w)),
            }
        }
        let edge_count = merged.len();

        let mut arcs = merged;
        if !directed {
            let mirrored: Vec<_> = arcs.iter().map(|&(u, v, w)| (v, u, w)).collect();
            arcs.extend(mirrored);
            arcs.sort_by_key(|x| (x.0, x.1));
        }

        let n = labels.len();
        let mut offsets = alloc::vec![0usize; n + 1];
        for &(u, _, _) in &arcs {
            offsets[u.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = arcs.iter().map(|a| a.1).collect();
        let weights = arcs.iter().map(|a| a.2).collect();

        let report = LoadReport {
            nodes: n,
            edges: edge_count,
            self_loops_dropped: self_loops,
            duplicates_merged: duplicates,
        };
        let graph = Graph {
            directed,
            labels,
            index,
            offsets,
            targets,
            weights,
        };
        (graph, report)
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight(w))
    }
}
