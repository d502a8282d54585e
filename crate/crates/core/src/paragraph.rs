//! Content embeddings with the distributed-memory paragraph vector model,
//! concatenation variant (PV-DM/concat).
//!
//! Every node owns one document built from all of its posts; each post is a
//! paragraph. To predict the word at position `i`, the hidden layer is the
//! concatenation `[doc ; w(i-k) ; ... ; w(i-1) ; w(i+1) ; ... ; w(i+k)]` and the
//! score of a vocabulary word `t` is `U_t · h + b_t`. Windows that run past a
//! paragraph boundary are padded with a null token whose vector stays zero.
//! Training uses negative sampling; [`context_score`] evaluates the full
//! softmax.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::embedding::{EmbeddingMatrix, SharedMatrix};
use crate::graph::Graph;
use crate::math::{axpy, check_dims, clipped_sigmoid, dot, log_sigmoid};
use crate::skipgram::{TrainConfig, UnigramTable};
use crate::{rng, Error, Result};

/// Default minimum token count for the vocabulary.
pub const DEFAULT_MIN_COUNT: u64 = 2;

/// Zero-width joiners and combining marks stay inside words (Persian and
/// Arabic script use them mid-word).
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
        || matches!(c as u32,
            0x200C | 0x200D
            | 0x0300..=0x036F
            | 0x0610..=0x061A
            | 0x064B..=0x065F
            | 0x0670
            | 0x06D6..=0x06ED)
}

/// Lowercases and splits on anything that is not a word character.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if is_word_char(c) {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// All posts of one node; one tokenized paragraph per post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDocument {
    pub node: String,
    pub paragraphs: Vec<Vec<String>>,
}

impl NodeDocument {
    pub fn token_count(&self) -> usize {
        self.paragraphs.iter().map(Vec::len).sum()
    }
}

/// Groups `(node, post text)` records into one document per node, in order
/// of each node's first record.
pub fn assemble_documents<I, N, T>(records: I) -> Vec<NodeDocument>
where
    I: IntoIterator<Item = (N, T)>,
    N: AsRef<str>,
    T: AsRef<str>,
{
    let mut position: BTreeMap<String, usize> = BTreeMap::new();
    let mut docs: Vec<NodeDocument> = Vec::new();
    for (node, text) in records {
        let node = node.as_ref();
        let idx = match position.get(node) {
            Some(&i) => i,
            None => {
                position.insert(String::from(node), docs.len());
                docs.push(NodeDocument {
                    node: String::from(node),
                    paragraphs: Vec::new(),
                });
                docs.len() - 1
            }
        };
        docs[idx].paragraphs.push(tokenize(text.as_ref()));
    }
    docs
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    /// Keeps tokens seen at least `min_count` times, ordered by descending
    /// count then lexicographically.
    pub fn build(docs: &[NodeDocument], min_count: u64) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for token in docs.iter().flat_map(|d| d.paragraphs.iter().flatten()) {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
        let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let tokens: Vec<String> = kept.iter().map(|&(t, _)| String::from(t)).collect();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            tokens,
            counts: kept.iter().map(|&(_, c)| c).collect(),
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

/// Output projection `y = U h + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLayer {
    pub weights: EmbeddingMatrix,
    pub bias: Vec<f64>,
}

impl OutputLayer {
    pub fn zeros(vocab: usize, hidden: usize) -> Self {
        OutputLayer {
            weights: EmbeddingMatrix::zeros(vocab, hidden),
            bias: vec![0.0; vocab],
        }
    }

    pub fn logits(&self, hidden: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.weights.dim(), hidden.len())?;
        Ok((0..self.bias.len())
            .map(|t| dot(self.weights.row(t), hidden) + self.bias[t])
            .collect())
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&y| libm::exp(y - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `[paragraph ; words...]` with `None` slots as zeros.
pub fn concat_hidden(paragraph: &[f64], context_words: &[Option<&[f64]>]) -> Result<Vec<f64>> {
    let d = paragraph.len();
    let mut hidden = Vec::with_capacity(d * (context_words.len() + 1));
    hidden.extend_from_slice(paragraph);
    for w in context_words {
        match w {
            Some(v) => {
                check_dims(d, v.len())?;
                hidden.extend_from_slice(v);
            }
            None => hidden.extend(core::iter::repeat_n(0.0, d)),
        }
    }
    Ok(hidden)
}

/// Full-softmax probability of `target` given the context words and the
/// paragraph vector.
pub fn context_score(
    context_words: &[Option<&[f64]>],
    paragraph: &[f64],
    output: &OutputLayer,
    vocab: &Vocabulary,
    target: &str,
) -> Result<f64> {
    let t = vocab
        .get(target)
        .ok_or_else(|| Error::UnknownToken(String::from(target)))?;
    let hidden = concat_hidden(paragraph, context_words)?;
    let probs = softmax(&output.logits(&hidden)?);
    Ok(probs[t])
}

/// Loss of one output term: `-ln σ(s)` for `label = 1`, `-ln σ(-s)` for
/// `label = 0`, with `s = row · hidden + bias`.
pub fn output_loss(hidden: &[f64], row: &[f64], bias: f64, label: f64) -> f64 {
    let s = dot(row, hidden) + bias;
    -(label * log_sigmoid(s) + (1.0 - label) * log_sigmoid(-s))
}

/// One SGD step on [`output_loss`]. Updates `row` and `bias` in place and
/// accumulates `-lr · ∂L/∂hidden` into `hidden_grad`.
#[inline]
pub fn output_update(hidden: &[f64], row: &mut [f64], bias: &mut f64, label: f64, lr: f64, hidden_grad: &mut [f64]) {
    let s = dot(row, hidden) + *bias;
    let g = (label - clipped_sigmoid(s)) * lr;
    axpy(g, row, hidden_grad);
    axpy(g, hidden, row);
    *bias += g;
}

/// Paragraph vectors keyed by node label.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentEmbedding {
    pub nodes: Vec<String>,
    pub vectors: EmbeddingMatrix,
}

impl ContentEmbedding {
    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn get(&self, node: &str) -> Option<&[f64]> {
        self.nodes.iter().position(|n| n == node).map(|i| self.vectors.row(i))
    }

    /// One row per graph node; nodes without a document get zeros.
    pub fn align(&self, g: &Graph) -> EmbeddingMatrix {
        let mut out = EmbeddingMatrix::zeros(g.node_count(), self.dim());
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(u) = g.node_id(node) {
                out.row_mut(u.index()).copy_from_slice(self.vectors.row(i));
            }
        }
        out
    }
}

/// PV-DM state that can be driven by one or several threads.
pub struct ParagraphTrainer {
    cfg: TrainConfig,
    vocab: Vocabulary,
    /// Per document, per paragraph, vocabulary ids of retained tokens.
    encoded: Vec<Vec<Vec<usize>>>,
    nodes: Vec<String>,
    table: UnigramTable,
    docs: SharedMatrix,
    words: SharedMatrix,
    output: SharedMatrix,
    bias: SharedMatrix,
    processed: AtomicU64,
    total: u64,
}

impl ParagraphTrainer {
    pub fn new(documents: &[NodeDocument], cfg: TrainConfig, min_count: u64) -> Result<Self> {
        cfg.validate()?;
        if documents.is_empty() {
            return Err(Error::EmptyInput("documents"));
        }
        let vocab = Vocabulary::build(documents, min_count);
        let encoded: Vec<Vec<Vec<usize>>> = documents
            .iter()
            .map(|d| {
                d.paragraphs
                    .iter()
                    .map(|p| p.iter().filter_map(|t| vocab.get(t)).collect())
                    .collect()
            })
            .collect();
        let tokens: usize = encoded.iter().flatten().map(Vec::len).sum();
        if tokens == 0 {
            return Err(Error::EmptyDocuments);
        }
        let table = UnigramTable::new(vocab.counts())?;
        let hidden = cfg.dim * (2 * cfg.window + 1);
        let mut rng = rng::from_seed(cfg.seed);
        let docs = EmbeddingMatrix::uniform(documents.len(), cfg.dim, &mut rng);
        let words = EmbeddingMatrix::uniform(vocab.len(), cfg.dim, &mut rng);
        Ok(ParagraphTrainer {
            cfg,
            encoded,
            nodes: documents.iter().map(|d| d.node.clone()).collect(),
            table,
            docs: SharedMatrix::from_matrix(&docs),
            words: SharedMatrix::from_matrix(&words),
            output: SharedMatrix::zeros(vocab.len(), hidden),
            bias: SharedMatrix::zeros(vocab.len(), 1),
            vocab,
            processed: AtomicU64::new(0),
            total: (tokens * cfg.epochs) as u64,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn document_count(&self) -> usize {
        self.encoded.len()
    }

    /// One pass over the documents in `docs`.
    pub fn train_documents<R: Rng + ?Sized>(&self, docs: Range<usize>, rng: &mut R) {
        let d = self.cfg.dim;
        let k = self.cfg.window;
        let mut hidden = vec![0.0; d * (2 * k + 1)];
        let mut grad = vec![0.0; hidden.len()];
        let mut row = vec![0.0; hidden.len()];
        let mut bias = [0.0];
        let mut slots: Vec<Option<usize>> = vec![None; 2 * k];

        for doc in docs {
            for paragraph in &self.encoded[doc] {
                for (i, &target) in paragraph.iter().enumerate() {
                    let processed = self.processed.fetch_add(1, Ordering::Relaxed);
                    let lr = self.cfg.learning_rate(processed, self.total);

                    self.docs.load(doc, &mut hidden[..d]);
                    for (s, slot) in slots.iter_mut().enumerate() {
                        // slots 0..k are positions i-k..i-1, k..2k are i+1..i+k
                        let pos = if s < k {
                            i as isize - (k - s) as isize
                        } else {
                            (i + s - k + 1) as isize
                        };
                        *slot = if pos >= 0 {
                            paragraph.get(pos as usize).copied()
                        } else {
                            None
                        };
                        let h = &mut hidden[d * (s + 1)..d * (s + 2)];
                        match *slot {
                            Some(w) => self.words.load(w, h),
                            None => h.iter_mut().for_each(|x| *x = 0.0),
                        }
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);

                    let mut step = |word: usize, label: f64, acc: &mut [f64]| {
                        self.output.load(word, &mut row);
                        self.bias.load(word, &mut bias);
                        output_update(&hidden, &mut row, &mut bias[0], label, lr, acc);
                        self.output.store(word, &row);
                        self.bias.store(word, &bias);
                    };
                    step(target, 1.0, &mut grad);
                    for _ in 0..self.cfg.negatives {
                        let n = self.table.sample(rng);
                        if n != target {
                            step(n, 0.0, &mut grad);
                        }
                    }

                    self.docs.add(doc, &grad[..d]);
                    for (s, slot) in slots.iter().enumerate() {
                        if let Some(w) = *slot {
                            self.words.add(w, &grad[d * (s + 1)..d * (s + 2)]);
                        }
                    }
                }
            }
        }
    }

    pub fn into_embedding(self) -> ContentEmbedding {
        ContentEmbedding {
            nodes: self.nodes,
            vectors: self.docs.into_matrix(),
        }
    }
}

/// Single-threaded, bit-reproducible PV-DM training.
pub fn train_content(documents: &[NodeDocument], cfg: &TrainConfig, min_count: u64) -> Result<ContentEmbedding> {
    let trainer = ParagraphTrainer::new(documents, *cfg, min_count)?;
    let mut rng = rng::stream(cfg.seed, 1);
    for _ in 0..cfg.epochs {
        trainer.train_documents(0..trainer.document_count(), &mut rng);
    }
    Ok(trainer.into_embedding())
}
