//! Multi-threaded drivers for the core stages.
//!
//! Walk generation gives the same corpus for any thread count, because every
//! walk has its own RNG stream. Embedding training with more than one thread
//! is lock-free (Hogwild): updates race on shared rows, so results vary from
//! run to run. With one thread every function delegates to the
//! bit-reproducible sequential routine.

use std::ops::Range;
use std::thread;

use linkpred_core::community::CommunityAssignment;
use linkpred_core::embedding::EmbeddingMatrix;
use linkpred_core::paragraph::{self, ContentEmbedding, NodeDocument, ParagraphTrainer};
use linkpred_core::rng;
use linkpred_core::skipgram::{self, SkipGramTrainer, TrainConfig};
use linkpred_core::walker::{self, WalkCorpus, WalkParams, Walker};
use linkpred_core::{Graph, NodeId, Result};

/// Splits `0..len` into at most `parts` contiguous, nearly equal ranges.
pub fn chunks(len: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, len.max(1));
    let (base, extra) = (len / parts, len % parts);
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let end = start + base + usize::from(i < extra);
        out.push(start..end);
        start = end;
    }
    out
}

pub fn generate_corpus(
    g: &Graph,
    communities: &CommunityAssignment,
    params: &WalkParams,
    threads: usize,
) -> Result<WalkCorpus> {
    if threads <= 1 {
        return walker::generate_corpus(g, communities, params);
    }
    let walker = Walker::new(g, communities, *params)?;
    let per_node = params.walks_per_node;
    let total = g.node_count() * per_node;
    let parts: Vec<Vec<Vec<NodeId>>> = thread::scope(|s| {
        let handles: Vec<_> = chunks(total, threads)
            .into_iter()
            .map(|range| {
                let walker = &walker;
                s.spawn(move || {
                    range
                        .map(|k| {
                            walker
                                .seeded_walk(NodeId((k / per_node) as u32), k % per_node)
                                .expect("start comes from the graph")
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("walk thread panicked"))
            .collect()
    });
    Ok(WalkCorpus {
        walks: parts.into_iter().flatten().collect(),
        walks_per_node: per_node,
    })
}

pub fn train_structural(corpus: &WalkCorpus, g: &Graph, cfg: &TrainConfig, threads: usize) -> Result<EmbeddingMatrix> {
    if threads <= 1 {
        return skipgram::train_structural(corpus, g, cfg);
    }
    let trainer = SkipGramTrainer::new(corpus, g, *cfg)?;
    let ranges = chunks(trainer.walk_count(), threads);
    thread::scope(|s| {
        for (t, range) in ranges.into_iter().enumerate() {
            let trainer = &trainer;
            s.spawn(move || {
                let mut rng = rng::stream(cfg.seed, 1 + t as u64);
                for _ in 0..cfg.epochs {
                    trainer.train_walks(range.clone(), &mut rng);
                }
            });
        }
    });
    Ok(trainer.into_embedding())
}

pub fn train_content(
    documents: &[NodeDocument],
    cfg: &TrainConfig,
    min_count: u64,
    threads: usize,
) -> Result<ContentEmbedding> {
    if threads <= 1 {
        return paragraph::train_content(documents, cfg, min_count);
    }
    let trainer = ParagraphTrainer::new(documents, *cfg, min_count)?;
    let ranges = chunks(trainer.document_count(), threads);
    thread::scope(|s| {
        for (t, range) in ranges.into_iter().enumerate() {
            let trainer = &trainer;
            s.spawn(move || {
                let mut rng = rng::stream(cfg.seed, 1 + t as u64);
                for _ in 0..cfg.epochs {
                    trainer.train_documents(range.clone(), &mut rng);
                }
            });
        }
    });
    Ok(trainer.into_embedding())
}

#[cfg(test)]
mod tests {
    use super::*;
    use linkpred_core::community::louvain;
    use linkpred_core::synthetic::stochastic_block_model;

    #[test]
    fn chunks_cover_exactly() {
        for len in 0..30 {
            for parts in 1..8 {
                let c = chunks(len, parts);
                assert_eq!(c.first().unwrap().start, 0);
                assert_eq!(c.last().unwrap().end, len);
                assert!(c.windows(2).all(|w| w[0].end == w[1].start));
                let sizes: Vec<usize> = c.iter().map(|r| r.len()).collect();
                assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn threaded_corpus_matches_sequential() {
        let (g, _) = stochastic_block_model(&[15, 15], 0.3, 0.05, false, 4).unwrap();
        let comm = louvain(&g, 1).unwrap();
        let params = WalkParams {
            max_length: 12,
            walks_per_node: 3,
            seed: 9,
            ..WalkParams::default()
        };
        let seq = generate_corpus(&g, &comm, &params, 1).unwrap();
        for threads in [2, 3, 8] {
            assert_eq!(generate_corpus(&g, &comm, &params, threads).unwrap(), seq);
        }
    }

    #[test]
    fn threaded_training_is_finite() {
        let (g, _) = stochastic_block_model(&[10, 10], 0.4, 0.05, false, 2).unwrap();
        let comm = louvain(&g, 1).unwrap();
        let params = WalkParams {
            max_length: 10,
            walks_per_node: 2,
            ..WalkParams::default()
        };
        let corpus = generate_corpus(&g, &comm, &params, 4).unwrap();
        let cfg = TrainConfig {
            dim: 8,
            epochs: 2,
            ..TrainConfig::default()
        };
        let m = train_structural(&corpus, &g, &cfg, 4).unwrap();
        assert_eq!((m.rows(), m.dim()), (20, 8));
        assert!(m.is_finite());
    }
}
