//! Node and edge feature vectors.
//!
//! A node's feature vector is its structural embedding followed by its
//! content embedding; an edge's is the Hadamard (component-wise) product of
//! its endpoints' node vectors.

use alloc::vec::Vec;

use crate::embedding::EmbeddingMatrix;
use crate::graph::NodeId;
use crate::math::check_dims;
use crate::{Error, Result};

/// Which embeddings contribute to node features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMode {
    #[default]
    Both,
    StructuralOnly,
    ContentOnly,
}

impl FeatureMode {
    pub fn uses_structure(self) -> bool {
        matches!(self, FeatureMode::Both | FeatureMode::StructuralOnly)
    }

    pub fn uses_content(self) -> bool {
        matches!(self, FeatureMode::Both | FeatureMode::ContentOnly)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Both => "both",
            FeatureMode::StructuralOnly => "structural-only",
            FeatureMode::ContentOnly => "content-only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "both" => Some(FeatureMode::Both),
            "structural-only" | "structural" => Some(FeatureMode::StructuralOnly),
            "content-only" | "content" => Some(FeatureMode::ContentOnly),
            _ => None,
        }
    }
}

/// `structural[node] ⧺ content[node]`. Nodes past the end of `content`
/// (no document) contribute zeros.
pub fn concat_features(
    structural: &EmbeddingMatrix,
    content: Option<&EmbeddingMatrix>,
    node: NodeId,
) -> Result<Vec<f64>> {
    let s = structural.get(node.index())?;
    let d_c = content.map_or(0, EmbeddingMatrix::dim);
    let mut out = Vec::with_capacity(s.len() + d_c);
    out.extend_from_slice(s);
    match content {
        Some(c) if node.index() < c.rows() => out.extend_from_slice(c.row(node.index())),
        _ => out.resize(s.len() + d_c, 0.0),
    }
    Ok(out)
}

/// Component-wise product.
pub fn hadamard_edge(f_u: &[f64], f_v: &[f64]) -> Result<Vec<f64>> {
    check_dims(f_u.len(), f_v.len())?;
    Ok(f_u.iter().zip(f_v).map(|(a, b)| a * b).collect())
}

/// Per-node feature vectors for one [`FeatureMode`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatures {
    matrix: EmbeddingMatrix,
}

impl NodeFeatures {
    /// `content`, when given, must have one row per structural row (see
    /// `ContentEmbedding::align`).
    pub fn compose(mode: FeatureMode, structural: &EmbeddingMatrix, content: Option<&EmbeddingMatrix>) -> Result<Self> {
        let n = structural.rows();
        if let Some(c) = content {
            check_dims(n, c.rows())?;
        }
        let matrix = match mode {
            FeatureMode::StructuralOnly => structural.clone(),
            FeatureMode::ContentOnly => content.ok_or(Error::EmptyInput("content embedding"))?.clone(),
            FeatureMode::Both => {
                let rows: Result<Vec<Vec<f64>>> = (0..n)
                    .map(|i| concat_features(structural, content, NodeId::from(i)))
                    .collect();
                let rows = rows?;
                let dim = structural.dim() + content.map_or(0, EmbeddingMatrix::dim);
                EmbeddingMatrix::from_rows(dim, &rows)?
            }
        };
        Ok(NodeFeatures { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn node(&self, u: NodeId) -> Result<&[f64]> {
        self.matrix.get(u.index())
    }

    pub fn edge(&self, u: NodeId, v: NodeId) -> Result<Vec<f64>> {
        hadamard_edge(self.node(u)?, self.node(v)?)
    }

    pub fn edges(&self, pairs: &[(NodeId, NodeId)]) -> Result<Vec<Vec<f64>>> {
        pairs.iter().map(|&(u, v)| self.edge(u, v)).collect()
    }
}
