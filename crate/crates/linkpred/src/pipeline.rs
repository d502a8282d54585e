//! End-to-end orchestration: ingest, split, communities, walks, structural
//! and content embeddings, classifier, AUC against the five baselines.
//!
//! The split is drawn first, from its own derived seed, so every ablation
//! mode and every dimension in a sweep sees the same train/test pairs. Walks
//! and baselines only ever see the training graph.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use linkpred_core::auc::{auc, AucMode};
use linkpred_core::baselines::{Neighborhoods, ScoreKind};
use linkpred_core::classifier::{train_classifier, TrainedClassifier};
use linkpred_core::community::{louvain, modularity, CommunityAssignment};
use linkpred_core::embedding::EmbeddingMatrix;
use linkpred_core::features::NodeFeatures;
use linkpred_core::paragraph::{assemble_documents, ContentEmbedding};
use linkpred_core::rng::derive_seed;
use linkpred_core::split::{random_removal_split, temporal_split, DatasetSplit, Pair};
use linkpred_core::walker::WalkCorpus;
use linkpred_core::{Graph, LoadReport};

use crate::config::PipelineConfig;
use crate::io::{self, EmbeddingTable, ModelFile};
use crate::parallel;

pub const COMMUNITIES_FILE: &str = "communities.tsv";
pub const WALKS_FILE: &str = "walks.txt";
pub const STRUCTURAL_FILE: &str = "structural.emb";
pub const CONTENT_FILE: &str = "content.emb";
pub const SPLIT_FILE: &str = "split.tsv";
pub const MODEL_FILE: &str = "model.json";
pub const REPORT_FILE: &str = "report.txt";

/// An error tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: &'static str, err: impl std::fmt::Display) -> Self {
        PipelineError {
            stage,
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

trait Tag<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: std::fmt::Display> Tag<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}

/// Per-stage seeds, all derived from the one global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSeeds {
    pub split: u64,
    pub communities: u64,
    pub walks: u64,
    pub structural: u64,
    pub content: u64,
    pub classifier: u64,
}

impl StageSeeds {
    pub fn new(seed: u64) -> Self {
        StageSeeds {
            split: derive_seed(seed, 1),
            communities: derive_seed(seed, 2),
            walks: derive_seed(seed, 3),
            structural: derive_seed(seed, 4),
            content: derive_seed(seed, 5),
            classifier: derive_seed(seed, 6),
        }
    }
}

/// Loaded input data.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub graph: Graph,
    pub report: LoadReport,
    pub later: Option<(Graph, LoadReport)>,
    /// `(node, post text)` records.
    pub content: Option<Vec<(String, String)>>,
}

impl Inputs {
    pub fn new(graph: Graph) -> Self {
        let report = LoadReport {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            ..LoadReport::default()
        };
        Inputs {
            graph,
            report,
            later: None,
            content: None,
        }
    }

    pub fn with_content(mut self, records: Vec<(String, String)>) -> Self {
        self.content = Some(records);
        self
    }

    pub fn with_later(mut self, later: Graph) -> Self {
        let report = LoadReport {
            nodes: later.node_count(),
            edges: later.edge_count(),
            ..LoadReport::default()
        };
        self.later = Some((later, report));
        self
    }

    /// The graph that walks and baselines may see: the first snapshot for a
    /// temporal split, otherwise the graph without its test edges.
    pub fn training_graph(&self, split: &DatasetSplit) -> Graph {
        match self.later {
            Some(_) => self.graph.clone(),
            None => self.graph.without_edges(&split.positive_test),
        }
    }
}

fn open(path: &Path) -> std::io::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn load_graph(path: &Path, cfg: &PipelineConfig) -> Result<(Graph, LoadReport), io::FormatError> {
    io::parse_edge_list(open(path)?, cfg.directed, cfg.default_weight).map_err(|e| match e {
        io::FormatError::Line { line, message } => io::FormatError::Line {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn load_content(path: &Path) -> Result<Vec<(String, String)>, io::FormatError> {
    io::read_content(open(path)?)
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    if cfg.mode.uses_content() && cfg.content.is_none() {
        return Err(PipelineError::new(
            "ingest",
            format!("mode {} needs a content file", cfg.mode.as_str()),
        ));
    }
    if cfg.mode.uses_content() {
        return load_given(cfg);
    }
    load_given(&PipelineConfig {
        content: None,
        ..cfg.clone()
    })
}

/// Loads every configured file regardless of the mode.
pub fn load_given(cfg: &PipelineConfig) -> Result<Inputs> {
    let edges = cfg
        .edges
        .as_deref()
        .ok_or_else(|| PipelineError::new("ingest", "no edge list given"))?;
    let (graph, report) = load_graph(edges, cfg).stage("ingest")?;
    let later = match &cfg.later_edges {
        Some(p) => Some(load_graph(p, cfg).stage("ingest")?),
        None => None,
    };
    let content = match &cfg.content {
        Some(p) => Some(load_content(p).stage("ingest")?),
        None => None,
    };
    Ok(Inputs {
        graph,
        report,
        later,
        content,
    })
}

/// Output directory with the standard file names.
#[derive(Debug, Clone)]
pub struct OutputDir(pub PathBuf);

impl OutputDir {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(path)?;
        Ok(OutputDir(path.to_owned()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn reader(&self, name: &str) -> std::io::Result<BufReader<File>> {
        open(&self.path(name))
    }

    /// Writes `name` through `f` and flushes it before returning.
    pub fn write<F>(&self, name: &str, f: F) -> Result<(), io::FormatError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), io::FormatError>,
    {
        let path = self.path(name);
        let file =
            File::create(&path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

pub fn make_split(cfg: &PipelineConfig, inputs: &Inputs) -> Result<(DatasetSplit, usize)> {
    let seed = StageSeeds::new(cfg.seed).split;
    match &inputs.later {
        Some((later, _)) => {
            let t = temporal_split(&inputs.graph, later, seed).stage("split")?;
            Ok((t.split, t.dropped_unseen))
        }
        None => Ok((
            random_removal_split(&inputs.graph, cfg.test_fraction, seed).stage("split")?,
            0,
        )),
    }
}

pub fn detect_communities(g: &Graph, cfg: &PipelineConfig) -> Result<CommunityAssignment> {
    louvain(g, StageSeeds::new(cfg.seed).communities).stage("communities")
}

pub fn generate_walks(g: &Graph, communities: &CommunityAssignment, cfg: &PipelineConfig) -> Result<WalkCorpus> {
    let mut params = cfg.walk;
    params.seed = StageSeeds::new(cfg.seed).walks;
    parallel::generate_corpus(g, communities, &params, cfg.threads).stage("walk")
}

pub fn structural_embedding(corpus: &WalkCorpus, g: &Graph, cfg: &PipelineConfig) -> Result<EmbeddingMatrix> {
    let mut tc = cfg.structural;
    tc.seed = StageSeeds::new(cfg.seed).structural;
    parallel::train_structural(corpus, g, &tc, cfg.threads).stage("embed-struct")
}

pub fn content_embedding(records: &[(String, String)], cfg: &PipelineConfig) -> Result<ContentEmbedding> {
    let docs = assemble_documents(records.iter().map(|(n, t)| (n, t)));
    let mut tc = cfg.content_model;
    tc.seed = StageSeeds::new(cfg.seed).content;
    parallel::train_content(&docs, &tc, cfg.min_count, cfg.threads).stage("embed-content")
}

/// Node features for `cfg.mode`. Embeddings a mode does not use may be `None`.
pub fn node_features(
    cfg: &PipelineConfig,
    node_count: usize,
    structural: Option<&EmbeddingMatrix>,
    content: Option<&EmbeddingMatrix>,
) -> Result<NodeFeatures> {
    let empty = EmbeddingMatrix::zeros(node_count, 0);
    let s = match (cfg.mode.uses_structure(), structural) {
        (true, Some(s)) => s,
        (true, None) => return Err(PipelineError::new("train", "structural embedding missing")),
        (false, _) => &empty,
    };
    if cfg.mode.uses_content() && content.is_none() {
        return Err(PipelineError::new("train", "content embedding missing"));
    }
    NodeFeatures::compose(cfg.mode, s, content).stage("train")
}

pub fn fit(cfg: &PipelineConfig, features: &NodeFeatures, split: &DatasetSplit) -> Result<TrainedClassifier> {
    let (pairs, labels) = split.train();
    let xs = features.edges(&pairs).stage("train")?;
    let mut cc = cfg.classifier;
    cc.seed = StageSeeds::new(cfg.seed).classifier;
    train_classifier(&xs, &labels, &cc).stage("train")
}

fn scores<F: FnMut(Pair) -> linkpred_core::Result<f64>>(pairs: &[Pair], f: F) -> Result<Vec<f64>> {
    pairs
        .iter()
        .copied()
        .map(f)
        .collect::<linkpred_core::Result<_>>()
        .stage("evaluate")
}

fn exact_auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    auc(pos, neg, AucMode::Exact).stage("evaluate")
}

/// Exact AUC of the classifier on the test pairs.
pub fn evaluate_model(
    model: &linkpred_core::classifier::LogisticModel,
    features: &NodeFeatures,
    split: &DatasetSplit,
) -> Result<f64> {
    let score = |(u, v): Pair| model.predict(&features.edge(u, v)?);
    let pos = scores(&split.positive_test, score)?;
    let neg = scores(&split.negative_test, score)?;
    exact_auc(&pos, &neg)
}

/// Exact AUC of one local baseline on the test pairs, scored on `training`.
pub fn evaluate_baseline(training: &Graph, kind: ScoreKind, split: &DatasetSplit) -> Result<f64> {
    let hoods = Neighborhoods::new(training);
    let pos = scores(&split.positive_test, |(u, v)| hoods.score(u, v, kind))?;
    let neg = scores(&split.negative_test, |(u, v)| hoods.score(u, v, kind))?;
    exact_auc(&pos, &neg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodAuc {
    pub method: String,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// The model first, then the baselines in [`ScoreKind::ALL`] order.
    pub results: Vec<MethodAuc>,
    pub stats: Vec<(&'static str, String)>,
    pub config: PipelineConfig,
}

impl Report {
    pub fn model_auc(&self) -> f64 {
        self.results[0].auc
    }

    pub fn baseline_auc(&self, kind: ScoreKind) -> Option<f64> {
        self.results.iter().find(|r| r.method == kind.as_str()).map(|r| r.auc)
    }

    pub fn best_baseline(&self) -> f64 {
        self.results[1..]
            .iter()
            .map(|r| r.auc)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Human table, then `[results]`, `[stats]` and `[config]` key/value
    /// sections. Contains no timings, so equal runs render equal bytes.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let width = self.results.iter().map(|r| r.method.len()).max().unwrap_or(0).max(6);
        let _ = writeln!(s, "{:<width$}  AUC", "method");
        let _ = writeln!(s, "{}  ------", "-".repeat(width));
        for r in &self.results {
            let _ = writeln!(s, "{:<width$}  {:.4}", r.method, r.auc);
        }
        s.push_str("\n[results]\n");
        for (i, r) in self.results.iter().enumerate() {
            let key = if i == 0 { "embedding" } else { r.method.as_str() };
            let _ = writeln!(s, "auc.{key} = {}", r.auc);
        }
        s.push_str("\n[stats]\n");
        for (k, v) in &self.stats {
            let _ = writeln!(s, "{k} = {v}");
        }
        s.push_str("\n[config]\n");
        s.push_str(&self.config.render());
        s
    }
}

fn write_stage<F>(out: Option<&OutputDir>, name: &str, stage: &'static str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), io::FormatError>,
{
    match out {
        Some(dir) => dir.write(name, f).stage(stage),
        None => Ok(()),
    }
}

/// Loads the configured inputs and runs every stage.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Report> {
    cfg.validate().stage("config")?;
    let inputs = load_inputs(cfg)?;
    run_with_inputs(cfg, &inputs)
}

/// Runs every stage on already loaded inputs. When `cfg.output` is set,
/// each stage's result is written as soon as the stage finishes.
pub fn run_with_inputs(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Report> {
    cfg.validate().stage("config")?;
    let out = match &cfg.output {
        Some(p) => Some(OutputDir::create(p).stage("output")?),
        None => None,
    };
    let out = out.as_ref();
    let g = &inputs.graph;

    let (split, dropped) = make_split(cfg, inputs)?;
    write_stage(out, SPLIT_FILE, "split", |w| io::write_split(g, &split, w))?;
    let training = inputs.training_graph(&split);

    let mut stats: Vec<(&'static str, String)> = vec![
        ("nodes", g.node_count().to_string()),
        ("edges", g.edge_count().to_string()),
        ("self_loops_dropped", inputs.report.self_loops_dropped.to_string()),
        ("duplicates_merged", inputs.report.duplicates_merged.to_string()),
        (
            "split",
            if inputs.later.is_some() {
                "temporal"
            } else {
                "random-removal"
            }
            .to_owned(),
        ),
        ("train_positive", split.positive_train.len().to_string()),
        ("train_negative", split.negative_train.len().to_string()),
        ("test_positive", split.positive_test.len().to_string()),
        ("test_negative", split.negative_test.len().to_string()),
    ];
    if let Some((later, _)) = &inputs.later {
        stats.push(("later_edges", later.edge_count().to_string()));
        stats.push(("test_pairs_dropped_unseen", dropped.to_string()));
    }

    let structural = if cfg.mode.uses_structure() {
        let communities = detect_communities(&training, cfg)?;
        write_stage(out, COMMUNITIES_FILE, "communities", |w| {
            io::write_communities(&training, &communities, w)
        })?;
        let q = modularity(&training, &communities).stage("communities")?;
        stats.push(("communities", communities.community_count().to_string()));
        stats.push(("modularity", q.to_string()));

        let corpus = generate_walks(&training, &communities, cfg)?;
        write_stage(out, WALKS_FILE, "walk", |w| io::write_corpus(&training, &corpus, w))?;
        stats.push(("walks", corpus.len().to_string()));
        stats.push(("walk_tokens", corpus.token_count().to_string()));

        let m = structural_embedding(&corpus, &training, cfg)?;
        write_stage(out, STRUCTURAL_FILE, "embed-struct", |w| {
            io::write_embeddings(&EmbeddingTable::for_graph(&training, m.clone()), w)
        })?;
        Some(m)
    } else {
        None
    };

    let content = if cfg.mode.uses_content() {
        let records = inputs
            .content
            .as_deref()
            .ok_or_else(|| PipelineError::new("embed-content", "no content records"))?;
        let emb = content_embedding(records, cfg)?;
        write_stage(out, CONTENT_FILE, "embed-content", |w| {
            io::write_embeddings(
                &EmbeddingTable {
                    tokens: emb.nodes.clone(),
                    vectors: emb.vectors.clone(),
                },
                w,
            )
        })?;
        let aligned = emb.align(g);
        let covered = g.labels().iter().filter(|l| emb.get(l).is_some()).count();
        stats.push(("content_documents", emb.nodes.len().to_string()));
        stats.push(("nodes_with_content", covered.to_string()));
        Some(aligned)
    } else {
        None
    };

    let features = node_features(cfg, g.node_count(), structural.as_ref(), content.as_ref())?;
    let trained = fit(cfg, &features, &split)?;
    let model_file = ModelFile::new(
        cfg.mode,
        structural.as_ref().map_or(0, EmbeddingMatrix::dim),
        content.as_ref().map_or(0, EmbeddingMatrix::dim),
        &trained.model,
        &trained.loss_history,
    );
    write_stage(out, MODEL_FILE, "train", |w| io::write_model(&model_file, w))?;
    stats.push(("feature_dim", features.dim().to_string()));
    stats.push(("classifier_final_loss", model_file.final_loss.to_string()));

    let mut results = vec![MethodAuc {
        method: format!("embedding ({})", cfg.mode.as_str()),
        auc: evaluate_model(&trained.model, &features, &split)?,
    }];
    for kind in ScoreKind::ALL {
        results.push(MethodAuc {
            method: kind.as_str().to_owned(),
            auc: evaluate_baseline(&training, kind, &split)?,
        });
    }

    let report = Report {
        results,
        stats,
        config: cfg.clone(),
    };
    write_stage(out, REPORT_FILE, "report", |w| {
        Ok(w.write_all(report.render().as_bytes())?)
    })?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Structural,
    Content,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "structural" => Some(SweepAxis::Structural),
            "content" => Some(SweepAxis::Content),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Structural => "structural",
            SweepAxis::Content => "content",
        }
    }
}

/// Model AUC for each dimension on `axis`, the other dimension held at its
/// configured value. Every row uses the same split. Nothing is written.
pub fn sweep_dimension(
    cfg: &PipelineConfig,
    inputs: &Inputs,
    values: &[usize],
    axis: SweepAxis,
) -> Result<Vec<(usize, f64)>> {
    if values.is_empty() {
        return Err(PipelineError::new("sweep", "no dimension values given"));
    }
    values
        .iter()
        .map(|&d| {
            let mut c = cfg.clone();
            c.output = None;
            match axis {
                SweepAxis::Structural => c.structural.dim = d,
                SweepAxis::Content => c.content_model.dim = d,
            }
            Ok((d, run_with_inputs(&c, inputs)?.model_auc()))
        })
        .collect()
}

/// Tab-separated `dim<TAB>auc` table with a header line.
pub fn render_sweep(axis: SweepAxis, rows: &[(usize, f64)]) -> String {
    let mut s = format!("{}_dim\tauc\n", axis.as_str());
    for (d, a) in rows {
        let _ = writeln!(s, "{d}\t{a}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use linkpred_core::features::FeatureMode;
    use linkpred_core::synthetic::stochastic_block_model;

    fn small_cfg() -> PipelineConfig {
        let mut c = PipelineConfig {
            mode: FeatureMode::StructuralOnly,
            ..PipelineConfig::default()
        };
        c.walk.max_length = 10;
        c.walk.walks_per_node = 2;
        c.structural.dim = 8;
        c.structural.epochs = 1;
        c.classifier.epochs = 20;
        c
    }

    #[test]
    fn report_has_six_rows_and_resolved_config() {
        let (g, _) = stochastic_block_model(&[15, 15], 0.4, 0.05, false, 1).unwrap();
        let r = run_with_inputs(&small_cfg(), &Inputs::new(g)).unwrap();
        assert_eq!(r.results.len(), 6);
        assert_eq!(r.results[0].method, "embedding (structural-only)");
        assert!(r.results.iter().all(|m| (0.0..=1.0).contains(&m.auc)));
        let text = r.render();
        assert!(text.contains("[config]\n"));
        assert!(text.contains("\nauc.embedding = "));
        assert!(text.contains("\nauc.adamic-adar = "));
        assert!(text.contains("walk_length = 10\n"));
    }

    #[test]
    fn structural_only_has_struct_dim_features() {
        let (g, _) = stochastic_block_model(&[10, 10], 0.4, 0.05, false, 3).unwrap();
        let r = run_with_inputs(&small_cfg(), &Inputs::new(g)).unwrap();
        let dim = r.stats.iter().find(|(k, _)| *k == "feature_dim").unwrap();
        assert_eq!(dim.1, "8");
    }

    #[test]
    fn every_mode_runs() {
        let data = linkpred_core::synthetic::attributed_graph(&linkpred_core::synthetic::AttributedConfig {
            nodes: 40,
            p_in: 0.2,
            p_out: 0.02,
            ..Default::default()
        })
        .unwrap();
        let inputs = Inputs::new(data.graph).with_content(data.posts);
        for (mode, dim) in [
            (FeatureMode::StructuralOnly, "8"),
            (FeatureMode::ContentOnly, "6"),
            (FeatureMode::Both, "14"),
        ] {
            let mut c = small_cfg();
            c.mode = mode;
            c.content_model.dim = 6;
            c.content_model.epochs = 2;
            let r = run_with_inputs(&c, &inputs).unwrap();
            assert_eq!(r.stats.iter().find(|(k, _)| *k == "feature_dim").unwrap().1, dim);
            assert_eq!(r.results[0].method, format!("embedding ({})", mode.as_str()));
        }
    }

    #[test]
    fn split_does_not_depend_on_mode() {
        let (g, _) = stochastic_block_model(&[10, 10], 0.4, 0.05, false, 3).unwrap();
        let inputs = Inputs::new(g);
        let a = small_cfg();
        let mut b = small_cfg();
        b.mode = FeatureMode::Both;
        b.structural.dim = 32;
        assert_eq!(make_split(&a, &inputs).unwrap(), make_split(&b, &inputs).unwrap());
    }

    #[test]
    fn errors_name_their_stage() {
        let mut b = linkpred_core::GraphBuilder::new(false);
        b.add_edge("a", "b", 1.0).unwrap();
        b.add_edge("b", "c", 1.0).unwrap();
        b.add_edge("a", "c", 1.0).unwrap();
        let e = run_with_inputs(&small_cfg(), &Inputs::new(b.build().0)).unwrap_err();
        assert_eq!(e.stage, "split");
        assert!(e.to_string().starts_with("split: "), "{e}");
    }

    #[test]
    fn sweep_rows() {
        let (g, _) = stochastic_block_model(&[10, 10], 0.4, 0.05, false, 3).unwrap();
        let inputs = Inputs::new(g);
        assert!(sweep_dimension(&small_cfg(), &inputs, &[], SweepAxis::Structural).is_err());
        let rows = sweep_dimension(&small_cfg(), &inputs, &[2, 4, 8, 16], SweepAxis::Structural).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|&(_, a)| (0.0..=1.0).contains(&a)));
        assert_eq!(render_sweep(SweepAxis::Structural, &rows).lines().count(), 5);
    }
}
