use std::io::{BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use linkpred::config::PipelineConfig;
use linkpred::io::{self, EmbeddingTable, ModelFile};
use linkpred::pipeline::{self as pl, Inputs, MethodAuc, OutputDir, PipelineError, Report, SweepAxis};
use linkpred_core::baselines::{Neighborhoods, ScoreKind};
use linkpred_core::community::modularity;
use linkpred_core::embedding::EmbeddingMatrix;
use linkpred_core::split::DatasetSplit;
use linkpred_core::Graph;

/// Community-aware random-walk embeddings for link prediction.
///
/// Stages read and write fixed file names inside `--output`, so running
/// `split`, `communities`, `walk`, `embed-struct`, `embed-content`, `train`
/// and `evaluate` in turn produces the same files as `run`.
#[derive(Parser)]
#[command(name = "linkpred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the edge list(s) and print load statistics.
    Ingest(ConfigArgs),
    /// Louvain communities of the training graph -> communities.tsv.
    Communities(ConfigArgs),
    /// Community-aware random walks -> walks.txt.
    Walk(ConfigArgs),
    /// Skip-gram over walks.txt -> structural.emb.
    EmbedStruct(ConfigArgs),
    /// PV-DM over the content file -> content.emb.
    EmbedContent(ConfigArgs),
    /// Random-removal or temporal split -> split.tsv.
    Split(ConfigArgs),
    /// Logistic regression on the training pairs -> model.json.
    Train(ConfigArgs),
    /// AUC of the model and the baselines on the test pairs -> report.txt.
    Evaluate(ConfigArgs),
    /// Print `u<TAB>v<TAB>score` for one local baseline.
    Baseline {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// common-neighbors, jaccard, adamic-adar, preferential-attachment or sorensen.
        #[arg(long, default_value = "common-neighbors")]
        kind: String,
        /// `u<TAB>v` pairs to score; defaults to the test pairs of split.tsv.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Every stage end to end.
    Run(ConfigArgs),
    /// Model AUC over a list of embedding dimensions.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated dimensions, e.g. 20,50,100,200.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// structural or content.
        #[arg(long, default_value = "structural")]
        axis: String,
    },
}

/// Pipeline settings. Flags override values read from `--config`.
#[derive(Args, Default)]
struct ConfigArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    edges: Option<String>,
    /// Second snapshot; selects the temporal split.
    #[arg(long)]
    later_edges: Option<String>,
    /// JSON-lines file of {"node": .., "text": ..} records.
    #[arg(long)]
    content: Option<String>,
    #[arg(long, short)]
    output: Option<String>,
    #[arg(long)]
    directed: Option<String>,
    #[arg(long)]
    default_weight: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    walk_length: Option<String>,
    #[arg(long)]
    walks_per_node: Option<String>,
    #[arg(long)]
    struct_dim: Option<String>,
    #[arg(long)]
    struct_window: Option<String>,
    #[arg(long)]
    struct_epochs: Option<String>,
    #[arg(long)]
    struct_negatives: Option<String>,
    #[arg(long)]
    struct_lr_start: Option<String>,
    #[arg(long)]
    struct_lr_end: Option<String>,
    #[arg(long)]
    content_dim: Option<String>,
    #[arg(long)]
    content_window: Option<String>,
    #[arg(long)]
    content_epochs: Option<String>,
    #[arg(long)]
    content_negatives: Option<String>,
    #[arg(long)]
    content_lr_start: Option<String>,
    #[arg(long)]
    content_lr_end: Option<String>,
    #[arg(long)]
    min_count: Option<String>,
    #[arg(long)]
    test_fraction: Option<String>,
    #[arg(long)]
    classifier_lr: Option<String>,
    #[arg(long)]
    classifier_epochs: Option<String>,
    #[arg(long)]
    classifier_l2: Option<String>,
    #[arg(long)]
    classifier_batch_size: Option<String>,
    #[arg(long)]
    classifier_standardize: Option<String>,
    /// both, structural-only or content-only.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads; 1 is bit-reproducible.
    #[arg(long)]
    threads: Option<String>,
}

impl ConfigArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 31] {
        [
            ("edges", &self.edges),
            ("later_edges", &self.later_edges),
            ("content", &self.content),
            ("output", &self.output),
            ("directed", &self.directed),
            ("default_weight", &self.default_weight),
            ("alpha", &self.alpha),
            ("walk_length", &self.walk_length),
            ("walks_per_node", &self.walks_per_node),
            ("struct_dim", &self.struct_dim),
            ("struct_window", &self.struct_window),
            ("struct_epochs", &self.struct_epochs),
            ("struct_negatives", &self.struct_negatives),
            ("struct_lr_start", &self.struct_lr_start),
            ("struct_lr_end", &self.struct_lr_end),
            ("content_dim", &self.content_dim),
            ("content_window", &self.content_window),
            ("content_epochs", &self.content_epochs),
            ("content_negatives", &self.content_negatives),
            ("content_lr_start", &self.content_lr_start),
            ("content_lr_end", &self.content_lr_end),
            ("min_count", &self.min_count),
            ("test_fraction", &self.test_fraction),
            ("classifier_lr", &self.classifier_lr),
            ("classifier_epochs", &self.classifier_epochs),
            ("classifier_l2", &self.classifier_l2),
            ("classifier_batch_size", &self.classifier_batch_size),
            ("classifier_standardize", &self.classifier_standardize),
            ("mode", &self.mode),
            ("seed", &self.seed),
            ("threads", &self.threads),
        ]
    }

    fn resolve(&self) -> Result<PipelineConfig, PipelineError> {
        let tag = |e| PipelineError::new("config", e);
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::from_file(p).map_err(tag)?,
            None => PipelineConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(key, v).map_err(tag)?;
            }
        }
        Ok(cfg)
    }
}

fn output_dir(cfg: &PipelineConfig) -> Result<OutputDir, PipelineError> {
    let p = cfg
        .output
        .as_deref()
        .ok_or_else(|| PipelineError::new("config", "--output is required"))?;
    OutputDir::create(p).map_err(|e| PipelineError::new("output", e))
}

/// Stage context shared by the staged subcommands.
struct Staged {
    cfg: PipelineConfig,
    inputs: Inputs,
    out: OutputDir,
}

impl Staged {
    fn new(args: &ConfigArgs) -> Result<Self, PipelineError> {
        let cfg = args.resolve()?;
        let inputs = pl::load_inputs(&cfg)?;
        let out = output_dir(&cfg)?;
        Ok(Staged { cfg, inputs, out })
    }

    fn read<T>(
        &self,
        stage: &'static str,
        name: &str,
        f: impl FnOnce(std::io::BufReader<std::fs::File>) -> io::Result<T>,
    ) -> Result<T, PipelineError> {
        let r = self.out.reader(name).map_err(|e| PipelineError::new(stage, e))?;
        f(r).map_err(|e| PipelineError::new(stage, format!("{name}: {e}")))
    }

    fn write(
        &self,
        stage: &'static str,
        name: &str,
        f: impl FnOnce(&mut BufWriter<std::fs::File>) -> io::Result<()>,
    ) -> Result<(), PipelineError> {
        self.out.write(name, f).map_err(|e| PipelineError::new(stage, e))
    }

    fn split(&self, stage: &'static str) -> Result<(DatasetSplit, Graph), PipelineError> {
        let split = self.read(stage, pl::SPLIT_FILE, |r| io::read_split(&self.inputs.graph, r))?;
        let training = self.inputs.training_graph(&split);
        Ok((split, training))
    }

    fn structural(&self, stage: &'static str, training: &Graph) -> Result<Option<EmbeddingMatrix>, PipelineError> {
        if !self.cfg.mode.uses_structure() {
            return Ok(None);
        }
        let table = self.read(stage, pl::STRUCTURAL_FILE, io::read_embeddings)?;
        table
            .align(training, false)
            .map(Some)
            .map_err(|e| PipelineError::new(stage, e))
    }

    fn content(&self, stage: &'static str) -> Result<Option<EmbeddingMatrix>, PipelineError> {
        if !self.cfg.mode.uses_content() {
            return Ok(None);
        }
        let table = self.read(stage, pl::CONTENT_FILE, io::read_embeddings)?;
        table
            .align(&self.inputs.graph, true)
            .map(Some)
            .map_err(|e| PipelineError::new(stage, e))
    }
}

fn print_stats(pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        println!("{k} = {v}");
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Ingest(args) => {
            let cfg = args.resolve()?;
            let inputs = pl::load_given(&cfg)?;
            let r = &inputs.report;
            print_stats(&[
                ("nodes", r.nodes.to_string()),
                ("edges", r.edges.to_string()),
                ("self_loops_dropped", r.self_loops_dropped.to_string()),
                ("duplicates_merged", r.duplicates_merged.to_string()),
            ]);
            if let Some((_, later)) = &inputs.later {
                print_stats(&[
                    ("later_nodes", later.nodes.to_string()),
                    ("later_edges", later.edges.to_string()),
                ]);
            }
            if let Some(c) = &inputs.content {
                print_stats(&[("content_records", c.len().to_string())]);
            }
        }
        Command::Split(args) => {
            let s = Staged::new(&args)?;
            let (split, dropped) = pl::make_split(&s.cfg, &s.inputs)?;
            s.write("split", pl::SPLIT_FILE, |w| io::write_split(&s.inputs.graph, &split, w))?;
            print_stats(&[
                ("train_positive", split.positive_train.len().to_string()),
                ("test_positive", split.positive_test.len().to_string()),
                ("test_pairs_dropped_unseen", dropped.to_string()),
            ]);
        }
        Command::Communities(args) => {
            let s = Staged::new(&args)?;
            let (_, training) = s.split("communities")?;
            let comm = pl::detect_communities(&training, &s.cfg)?;
            s.write("communities", pl::COMMUNITIES_FILE, |w| {
                io::write_communities(&training, &comm, w)
            })?;
            let q = modularity(&training, &comm).map_err(|e| PipelineError::new("communities", e))?;
            print_stats(&[
                ("communities", comm.community_count().to_string()),
                ("modularity", q.to_string()),
            ]);
        }
        Command::Walk(args) => {
            let s = Staged::new(&args)?;
            let (_, training) = s.split("walk")?;
            let comm = s.read("walk", pl::COMMUNITIES_FILE, |r| io::read_communities(&training, r))?;
            let corpus = pl::generate_walks(&training, &comm, &s.cfg)?;
            s.write("walk", pl::WALKS_FILE, |w| io::write_corpus(&training, &corpus, w))?;
            print_stats(&[
                ("walks", corpus.len().to_string()),
                ("walk_tokens", corpus.token_count().to_string()),
            ]);
        }
        Command::EmbedStruct(args) => {
            let s = Staged::new(&args)?;
            let (_, training) = s.split("embed-struct")?;
            let mut corpus = s.read("embed-struct", pl::WALKS_FILE, |r| io::read_corpus(&training, r))?;
            corpus.walks_per_node = s.cfg.walk.walks_per_node;
            let m = pl::structural_embedding(&corpus, &training, &s.cfg)?;
            s.write("embed-struct", pl::STRUCTURAL_FILE, |w| {
                io::write_embeddings(&EmbeddingTable::for_graph(&training, m), w)
            })?;
        }
        Command::EmbedContent(args) => {
            let s = Staged::new(&args)?;
            let records = match (&s.inputs.content, &s.cfg.content) {
                (Some(c), _) => c.clone(),
                (None, Some(p)) => pl::load_content(p).map_err(|e| PipelineError::new("embed-content", e))?,
                (None, None) => return Err(PipelineError::new("embed-content", "no content file given").into()),
            };
            let emb = pl::content_embedding(&records, &s.cfg)?;
            s.write("embed-content", pl::CONTENT_FILE, |w| {
                io::write_embeddings(
                    &EmbeddingTable {
                        tokens: emb.nodes,
                        vectors: emb.vectors,
                    },
                    w,
                )
            })?;
        }
        Command::Train(args) => {
            let s = Staged::new(&args)?;
            let (split, training) = s.split("train")?;
            let structural = s.structural("train", &training)?;
            let content = s.content("train")?;
            let features = pl::node_features(
                &s.cfg,
                s.inputs.graph.node_count(),
                structural.as_ref(),
                content.as_ref(),
            )?;
            let trained = pl::fit(&s.cfg, &features, &split)?;
            let file = ModelFile::new(
                s.cfg.mode,
                structural.as_ref().map_or(0, EmbeddingMatrix::dim),
                content.as_ref().map_or(0, EmbeddingMatrix::dim),
                &trained.model,
                &trained.loss_history,
            );
            s.write("train", pl::MODEL_FILE, |w| io::write_model(&file, w))?;
            print_stats(&[
                ("final_loss", file.final_loss.to_string()),
                ("epochs_run", file.epochs_run.to_string()),
            ]);
        }
        Command::Evaluate(args) => {
            let s = Staged::new(&args)?;
            let (split, training) = s.split("evaluate")?;
            let file = s.read("evaluate", pl::MODEL_FILE, io::read_model)?;
            if file.feature_mode() != Some(s.cfg.mode) {
                return Err(PipelineError::new(
                    "evaluate",
                    format!(
                        "model was trained in mode {}, config says {}",
                        file.mode,
                        s.cfg.mode.as_str()
                    ),
                )
                .into());
            }
            let structural = s.structural("evaluate", &training)?;
            let content = s.content("evaluate")?;
            let features = pl::node_features(
                &s.cfg,
                s.inputs.graph.node_count(),
                structural.as_ref(),
                content.as_ref(),
            )?;
            let mut results = vec![MethodAuc {
                method: format!("embedding ({})", s.cfg.mode.as_str()),
                auc: pl::evaluate_model(&file.model(), &features, &split)?,
            }];
            for kind in ScoreKind::ALL {
                results.push(MethodAuc {
                    method: kind.as_str().to_owned(),
                    auc: pl::evaluate_baseline(&training, kind, &split)?,
                });
            }
            let report = Report {
                results,
                stats: vec![
                    ("test_positive", split.positive_test.len().to_string()),
                    ("test_negative", split.negative_test.len().to_string()),
                    ("feature_dim", features.dim().to_string()),
                ],
                config: s.cfg.clone(),
            };
            let text = report.render();
            s.write("evaluate", pl::REPORT_FILE, |w| Ok(w.write_all(text.as_bytes())?))?;
            print!("{text}");
        }
        Command::Baseline { cfg, kind, pairs } => {
            let kind = ScoreKind::parse(&kind)
                .ok_or_else(|| PipelineError::new("baseline", format!("unknown baseline {kind:?}")))?;
            let s = Staged::new(&cfg)?;
            let (split, training) = s.split("baseline")?;
            let list = match pairs {
                Some(p) => read_pairs(&training, &p).map_err(|e| PipelineError::new("baseline", format!("{e:#}")))?,
                None => split
                    .positive_test
                    .iter()
                    .chain(&split.negative_test)
                    .copied()
                    .collect(),
            };
            let hoods = Neighborhoods::new(&training);
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            for (u, v) in list {
                let score = hoods.score(u, v, kind).map_err(|e| PipelineError::new("baseline", e))?;
                writeln!(w, "{}\t{}\t{}", training.label(u)?, training.label(v)?, score)?;
            }
            w.flush()?;
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            output_dir(&cfg)?;
            print!("{}", pl::run_pipeline(&cfg)?.render());
        }
        Command::Sweep { cfg, values, axis } => {
            let axis =
                SweepAxis::parse(&axis).ok_or_else(|| PipelineError::new("sweep", format!("unknown axis {axis:?}")))?;
            let cfg = cfg.resolve()?;
            cfg.validate().map_err(|e| PipelineError::new("config", e))?;
            let inputs = pl::load_inputs(&cfg)?;
            let rows = pl::sweep_dimension(&cfg, &inputs, &values, axis)?;
            let table = pl::render_sweep(axis, &rows);
            if let Some(p) = &cfg.output {
                let out = OutputDir::create(p).map_err(|e| PipelineError::new("output", e))?;
                out.write("sweep.tsv", |w| Ok(w.write_all(table.as_bytes())?))
                    .map_err(|e| PipelineError::new("sweep", e))?;
            }
            print!("{table}");
        }
    }
    Ok(())
}

fn read_pairs(g: &Graph, path: &std::path::Path) -> Result<Vec<(linkpred_core::NodeId, linkpred_core::NodeId)>> {
    let file = std::fs::File::open(path).with_context(|| path.display().to_string())?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("line {}: expected u<TAB>v", i + 1))?;
        let id = |t: &str| {
            g.node_id(t.trim())
                .ok_or_else(|| anyhow!("line {}: unknown node {:?}", i + 1, t))
        };
        out.push((id(a)?, id(b)?));
    }
    Ok(out)
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
