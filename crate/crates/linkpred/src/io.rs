//! Text file formats: edge lists, community assignments, walk corpora,
//! word2vec-style embeddings, JSON-lines content, splits and models.

use std::io::{BufRead, Write};

use linkpred_core::classifier::LogisticModel;
use linkpred_core::community::CommunityAssignment;
use linkpred_core::embedding::EmbeddingMatrix;
use linkpred_core::features::FeatureMode;
use linkpred_core::split::{DatasetSplit, Pair};
use linkpred_core::walker::WalkCorpus;
use linkpred_core::{Graph, GraphBuilder, LoadReport, NodeId};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("record {record}: {message}")]
    Record { record: usize, message: String },
    #[error(transparent)]
    Core(#[from] linkpred_core::Error),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

fn line_error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(l) => {
            let l = l.trim_end_matches('\r');
            if l.trim().is_empty() || l.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, l.to_owned())))
            }
        }
    })
}

fn lookup(g: &Graph, token: &str, line: usize) -> Result<NodeId> {
    g.node_id(token)
        .ok_or_else(|| line_error(line, format!("unknown node {token:?}")))
}

/// `src<TAB>dst[<TAB>weight]` lines; `#` comments and blank lines skipped.
pub fn parse_edge_list<R: BufRead>(reader: R, directed: bool, default_weight: f64) -> Result<(Graph, LoadReport)> {
    if !(default_weight.is_finite() && default_weight > 0.0) {
        return Err(linkpred_core::Error::InvalidWeight(default_weight).into());
    }
    let mut builder = GraphBuilder::new(directed);
    for item in content_lines(reader) {
        let (n, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        let weight = match fields.len() {
            2 => default_weight,
            3 => fields[2]
                .trim()
                .parse::<f64>()
                .map_err(|_| line_error(n, format!("weight {:?} is not a number", fields[2])))?,
            k => {
                return Err(line_error(
                    n,
                    format!("expected 2 or 3 tab-separated fields, found {k}"),
                ))
            }
        };
        let (src, dst) = (fields[0].trim(), fields[1].trim());
        if src.is_empty() || dst.is_empty() {
            return Err(line_error(n, "empty node token"));
        }
        builder
            .add_edge(src, dst, weight)
            .map_err(|e| line_error(n, e.to_string()))?;
    }
    Ok(builder.build())
}

/// One line per stored edge (each undirected edge once).
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    for (u, v, weight) in g.edges() {
        writeln!(w, "{}\t{}\t{}", g.label(u)?, g.label(v)?, weight)?;
    }
    Ok(())
}

pub fn write_communities<W: Write>(g: &Graph, a: &CommunityAssignment, mut w: W) -> Result<()> {
    for u in g.nodes() {
        writeln!(w, "{}\t{}", g.label(u)?, a.community_of(u))?;
    }
    Ok(())
}

/// `node<TAB>community` lines; every graph node must appear exactly once.
pub fn read_communities<R: BufRead>(g: &Graph, reader: R) -> Result<CommunityAssignment> {
    let mut labels: Vec<Option<u32>> = vec![None; g.node_count()];
    for item in content_lines(reader) {
        let (n, line) = item?;
        let (node, cid) = line
            .split_once('\t')
            .ok_or_else(|| line_error(n, "expected node<TAB>community"))?;
        let u = lookup(g, node.trim(), n)?;
        let c = cid
            .trim()
            .parse::<u32>()
            .map_err(|_| line_error(n, format!("community id {cid:?} is not an integer")))?;
        if labels[u.index()].replace(c).is_some() {
            return Err(line_error(n, format!("node {node:?} listed twice")));
        }
    }
    let labels: Vec<u32> = labels
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or(FormatError::Core(linkpred_core::Error::UnknownNode(i as u32))))
        .collect::<Result<_>>()?;
    Ok(CommunityAssignment::from_labels(&labels))
}

/// One walk per line, node tokens separated by single spaces.
pub fn write_corpus<W: Write>(g: &Graph, corpus: &WalkCorpus, mut w: W) -> Result<()> {
    for walk in &corpus.walks {
        for (i, &u) in walk.iter().enumerate() {
            if i > 0 {
                w.write_all(b" ")?;
            }
            w.write_all(g.label(u)?.as_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_corpus<R: BufRead>(g: &Graph, reader: R) -> Result<WalkCorpus> {
    let mut walks = Vec::new();
    for item in content_lines(reader) {
        let (n, line) = item?;
        let walk = line
            .split_whitespace()
            .map(|t| lookup(g, t, n))
            .collect::<Result<Vec<_>>>()?;
        walks.push(walk);
    }
    let walks_per_node = (walks.len() / g.node_count().max(1)).max(1);
    Ok(WalkCorpus { walks, walks_per_node })
}

/// Vectors keyed by node token, as stored in an embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub tokens: Vec<String>,
    pub vectors: EmbeddingMatrix,
}

impl EmbeddingTable {
    pub fn for_graph(g: &Graph, vectors: EmbeddingMatrix) -> Self {
        EmbeddingTable {
            tokens: g.labels().to_vec(),
            vectors,
        }
    }

    /// Rows reordered to the graph's node indices. With `zero_fill`, nodes
    /// missing from the table get zero vectors; otherwise they are an error.
    pub fn align(&self, g: &Graph, zero_fill: bool) -> Result<EmbeddingMatrix> {
        let dim = self.vectors.dim();
        let mut out = EmbeddingMatrix::zeros(g.node_count(), dim);
        let mut seen = vec![false; g.node_count()];
        for (i, token) in self.tokens.iter().enumerate() {
            if let Some(u) = g.node_id(token) {
                out.row_mut(u.index()).copy_from_slice(self.vectors.row(i));
                seen[u.index()] = true;
            }
        }
        if !zero_fill {
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(linkpred_core::Error::UnknownLabel(g.labels()[missing].clone()).into());
            }
        }
        Ok(out)
    }
}

/// word2vec text format: `rows dim` header, then `token v1 .. vd`. Values
/// use the shortest representation that reads back to the same `f64`.
pub fn write_embeddings<W: Write>(table: &EmbeddingTable, mut w: W) -> Result<()> {
    let m = &table.vectors;
    writeln!(w, "{} {}", m.rows(), m.dim())?;
    for (i, token) in table.tokens.iter().enumerate() {
        w.write_all(token.as_bytes())?;
        for x in m.row(i) {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut lines = content_lines(reader);
    let (n, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| line_error(1, "missing header"))?;
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| line_error(n, "header must be `rows dim`"))
    };
    let mut parts = header.split_whitespace();
    let (rows, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(r), Some(d), None) => (parse_usize(r)?, parse_usize(d)?),
        _ => return Err(line_error(n, "header must be `rows dim`")),
    };
    let mut tokens = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows);
    for item in lines {
        let (n, line) = item?;
        let mut parts = line.split(' ').filter(|s| !s.is_empty());
        let token = parts.next().ok_or_else(|| line_error(n, "missing token"))?;
        let values = parts
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| line_error(n, format!("{s:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(line_error(n, format!("expected {dim} values, found {}", values.len())));
        }
        tokens.push(token.to_owned());
        data.push(values);
    }
    if tokens.len() != rows {
        return Err(line_error(
            n,
            format!("header promises {rows} rows, found {}", tokens.len()),
        ));
    }
    Ok(EmbeddingTable {
        tokens,
        vectors: EmbeddingMatrix::from_rows(dim, &data)?,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContentRecord {
    node: String,
    text: String,
}

/// JSON-lines `{"node": .., "text": ..}` records; blank lines are skipped.
/// Errors carry the 1-based line number as the record number.
pub fn read_content<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: ContentRecord = serde_json::from_str(&line).map_err(|e| FormatError::Record {
            record: i + 1,
            message: e.to_string(),
        })?;
        out.push((r.node, r.text));
    }
    Ok(out)
}

/// Inverse of [`read_content`].
pub fn write_content<W: Write>(records: &[(String, String)], mut w: W) -> Result<()> {
    #[derive(Serialize)]
    struct Record<'a> {
        node: &'a str,
        text: &'a str,
    }
    for (node, text) in records {
        serde_json::to_writer(&mut w, &Record { node, text }).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

const SECTIONS: [&str; 4] = ["positive_train", "negative_train", "positive_test", "negative_test"];

/// Four `# section` blocks of `u<TAB>v` lines.
pub fn write_split<W: Write>(g: &Graph, split: &DatasetSplit, mut w: W) -> Result<()> {
    let sets = [
        &split.positive_train,
        &split.negative_train,
        &split.positive_test,
        &split.negative_test,
    ];
    for (name, pairs) in SECTIONS.iter().zip(sets) {
        writeln!(w, "# {name}")?;
        for &(u, v) in pairs.iter() {
            writeln!(w, "{}\t{}", g.label(u)?, g.label(v)?)?;
        }
    }
    Ok(())
}

pub fn read_split<R: BufRead>(g: &Graph, reader: R) -> Result<DatasetSplit> {
    let mut sets: [Vec<Pair>; 4] = Default::default();
    let mut current: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('#') {
            let name = name.trim();
            current = Some(
                SECTIONS
                    .iter()
                    .position(|s| *s == name)
                    .ok_or_else(|| line_error(n, format!("unknown section {name:?}")))?,
            );
            continue;
        }
        let s = current.ok_or_else(|| line_error(n, "pair before the first section header"))?;
        let (u, v) = line.split_once('\t').ok_or_else(|| line_error(n, "expected u<TAB>v"))?;
        sets[s].push((lookup(g, u.trim(), n)?, lookup(g, v.trim(), n)?));
    }
    let [positive_train, negative_train, positive_test, negative_test] = sets;
    Ok(DatasetSplit {
        positive_train,
        negative_train,
        positive_test,
        negative_test,
    })
}

/// Trained classifier plus what is needed to rebuild its features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub mode: String,
    pub structural_dim: usize,
    pub content_dim: usize,
    pub bias: f64,
    pub weights: Vec<f64>,
    pub final_loss: f64,
    pub epochs_run: usize,
}

impl ModelFile {
    pub fn new(
        mode: FeatureMode,
        structural_dim: usize,
        content_dim: usize,
        model: &LogisticModel,
        loss_history: &[f64],
    ) -> Self {
        ModelFile {
            mode: mode.as_str().to_owned(),
            structural_dim,
            content_dim,
            bias: model.bias,
            weights: model.weights.clone(),
            final_loss: loss_history.last().copied().unwrap_or(f64::NAN),
            epochs_run: loss_history.len().saturating_sub(1),
        }
    }

    pub fn model(&self) -> LogisticModel {
        LogisticModel {
            weights: self.weights.clone(),
            bias: self.bias,
        }
    }

    pub fn feature_mode(&self) -> Option<FeatureMode> {
        FeatureMode::parse(&self.mode)
    }
}

pub fn write_model<W: Write>(model: &ModelFile, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, model).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_model<R: BufRead>(reader: R) -> Result<ModelFile> {
    serde_json::from_reader(reader).map_err(|e| FormatError::Record {
        record: 1,
        message: e.to_string(),
    })
}
