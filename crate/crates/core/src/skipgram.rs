//! Structural embeddings: skip-gram with negative sampling over walk corpora,
//! where each observed pair's score is scaled by its edge weight.
//!
//! For a center node `u` and a context node `v` within the window, the
//! positive term maximizes `ln σ(w(u,v) · f(u)·c(v))` where `w(u,v)` is the
//! arc weight if `u -> v` exists and 1 otherwise. Each positive pair is
//! contrasted with `negatives` nodes drawn from the unigram^0.75
//! distribution of the corpus, all with weight 1.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::embedding::{EmbeddingMatrix, SharedMatrix};
use crate::graph::{Graph, NodeId};
use crate::math::{axpy, check_dims, clipped_sigmoid, dot, log_sigmoid, search_cumulative, sigmoid};
use crate::walker::WalkCorpus;
use crate::{rng, Error, Result};

/// Hyperparameters shared by the skip-gram and paragraph-vector trainers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    /// Learning rate decays linearly from `lr_start` to `lr_end` over all updates.
    pub lr_start: f64,
    pub lr_end: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 10,
            epochs: 5,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::param("window", "must be at least 1"));
        }
        if !(self.lr_end >= 0.0 && self.lr_start > self.lr_end && self.lr_start.is_finite()) {
            return Err(Error::param("lr", "need lr_start > lr_end >= 0"));
        }
        Ok(())
    }

    pub(crate) fn learning_rate(&self, processed: u64, total: u64) -> f64 {
        let progress = if total == 0 {
            0.0
        } else {
            processed as f64 / total as f64
        };
        (self.lr_start - (self.lr_start - self.lr_end) * progress).max(self.lr_end)
    }
}

/// Weight used for the pair `(u, v)`: the arc weight when `u -> v` exists, else 1.
pub fn edge_context_weight(g: &Graph, u: NodeId, v: NodeId) -> Result<f64> {
    g.check(u)?;
    g.check(v)?;
    Ok(g.edge_weight(u, v).unwrap_or(1.0))
}

/// `1 / (1 + exp(-(f_u · f_v) · weight))`.
pub fn pair_probability(f_u: &[f64], f_v: &[f64], weight: f64) -> Result<f64> {
    check_dims(f_u.len(), f_v.len())?;
    Ok(sigmoid(dot(f_u, f_v) * weight))
}

/// Loss of one (center, context) term: `-ln σ(x)` for `label = 1`,
/// `-ln σ(-x)` for `label = 0`, with `x = weight · input·context`.
pub fn pair_loss(input: &[f64], context: &[f64], weight: f64, label: f64) -> f64 {
    let x = weight * dot(input, context);
    -(label * log_sigmoid(x) + (1.0 - label) * log_sigmoid(-x))
}

/// Bound on the scalar step `lr · ∂L/∂x · weight` of one update. Heavy edge
/// weights would otherwise make the update overshoot and diverge.
pub const MAX_STEP: f64 = 1.0;

/// One SGD step on [`pair_loss`].
///
/// The context vector is updated in place; `-lr · ∂L/∂input` is accumulated
/// into `input_grad` so the caller can apply it after all negatives. The
/// step is exact as long as its scalar factor stays within [`MAX_STEP`].
#[inline]
pub fn pair_update(input: &[f64], context: &mut [f64], weight: f64, label: f64, lr: f64, input_grad: &mut [f64]) {
    let x = weight * dot(input, context);
    let g = ((label - clipped_sigmoid(x)) * weight * lr).clamp(-MAX_STEP, MAX_STEP);
    axpy(g, context, input_grad);
    axpy(g, input, context);
}

/// Sampling table for the smoothed unigram distribution `count^0.75`.
#[derive(Debug, Clone)]
pub struct UnigramTable {
    cumulative: Vec<f64>,
}

impl UnigramTable {
    pub fn new(counts: &[u64]) -> Result<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                acc += libm::pow(c as f64, 0.75);
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::EmptyInput("unigram counts"));
        }
        Ok(UnigramTable { cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        search_cumulative(&self.cumulative, rng.gen::<f64>() * total)
    }
}

/// Skip-gram state that can be driven by one or several threads.
pub struct SkipGramTrainer<'a> {
    graph: &'a Graph,
    corpus: &'a WalkCorpus,
    cfg: TrainConfig,
    table: UnigramTable,
    input: SharedMatrix,
    context: SharedMatrix,
    processed: AtomicU64,
    total: u64,
}

impl<'a> SkipGramTrainer<'a> {
    pub fn new(corpus: &'a WalkCorpus, graph: &'a Graph, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if corpus.token_count() == 0 {
            return Err(Error::EmptyInput("walk corpus"));
        }
        if let Some(&bad) = corpus.walks.iter().flatten().find(|u| !graph.contains(**u)) {
            return Err(Error::UnknownNode(bad.0));
        }
        let table = UnigramTable::new(&corpus.frequencies(graph.node_count()))?;
        let mut rng = rng::from_seed(cfg.seed);
        let input = EmbeddingMatrix::uniform(graph.node_count(), cfg.dim, &mut rng);
        Ok(SkipGramTrainer {
            graph,
            corpus,
            cfg,
            table,
            input: SharedMatrix::from_matrix(&input),
            context: SharedMatrix::zeros(graph.node_count(), cfg.dim),
            processed: AtomicU64::new(0),
            total: (corpus.token_count() * cfg.epochs) as u64,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn walk_count(&self) -> usize {
        self.corpus.len()
    }

    /// One pass over `walks` (indices into the corpus).
    pub fn train_walks<R: Rng + ?Sized>(&self, walks: Range<usize>, rng: &mut R) {
        let dim = self.cfg.dim;
        let mut center = vec![0.0; dim];
        let mut ctx = vec![0.0; dim];
        let mut grad = vec![0.0; dim];
        for walk in &self.corpus.walks[walks] {
            for (i, &u) in walk.iter().enumerate() {
                let processed = self.processed.fetch_add(1, Ordering::Relaxed);
                let lr = self.cfg.learning_rate(processed, self.total);
                let lo = i.saturating_sub(self.cfg.window);
                let hi = (i + self.cfg.window).min(walk.len() - 1);
                for (j, &v) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    self.input.load(u.index(), &mut center);
                    grad.iter_mut().for_each(|g| *g = 0.0);

                    let weight = self.graph.edge_weight(u, v).unwrap_or(1.0);
                    self.context.load(v.index(), &mut ctx);
                    pair_update(&center, &mut ctx, weight, 1.0, lr, &mut grad);
                    self.context.store(v.index(), &ctx);

                    for _ in 0..self.cfg.negatives {
                        let n = self.table.sample(rng);
                        if n == v.index() {
                            continue;
                        }
                        self.context.load(n, &mut ctx);
                        pair_update(&center, &mut ctx, 1.0, 0.0, lr, &mut grad);
                        self.context.store(n, &ctx);
                    }
                    self.input.add(u.index(), &grad);
                }
            }
        }
    }

    pub fn into_embedding(self) -> EmbeddingMatrix {
        self.input.into_matrix()
    }
}

/// Single-threaded, bit-reproducible training. Returns the input vectors,
/// one row per graph node.
pub fn train_structural(corpus: &WalkCorpus, g: &Graph, cfg: &TrainConfig) -> Result<EmbeddingMatrix> {
    let trainer = SkipGramTrainer::new(corpus, g, *cfg)?;
    let mut rng = rng::stream(cfg.seed, 1);
    for _ in 0..cfg.epochs {
        trainer.train_walks(0..trainer.walk_count(), &mut rng);
    }
    Ok(trainer.into_embedding())
}
