//! Planted-partition graph generators for tests, sweeps and demos.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::graph::{Graph, GraphBuilder};
use crate::{rng, Error, Result};

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, "must lie in [0, 1]"))
    }
}

fn node_label(i: usize) -> String {
    format!("n{i}")
}

/// Stochastic block model with unit weights. Nodes are labelled `n0, n1, ...`
/// and assigned to blocks in order. Returns the graph and each node's block.
pub fn stochastic_block_model(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    directed: bool,
    seed: u64,
) -> Result<(Graph, Vec<u32>)> {
    check_probability("p_in", p_in)?;
    check_probability("p_out", p_out)?;
    let blocks: Vec<u32> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| core::iter::repeat_n(b as u32, size))
        .collect();
    let n = blocks.len();
    let mut rng = rng::from_seed(seed);
    let mut builder = GraphBuilder::new(directed);
    for i in 0..n {
        builder.add_node(&node_label(i));
    }
    for u in 0..n {
        let start = if directed { 0 } else { u + 1 };
        for v in start..n {
            if u == v {
                continue;
            }
            let p = if blocks[u] == blocks[v] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                builder.add_edge_ids(u.into(), v.into(), 1.0)?;
            }
        }
    }
    Ok((builder.build().0, blocks))
}

/// A graph whose links come from two independent sources: block structure,
/// and shared topics that are only visible through node content.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributedConfig {
    pub nodes: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub topics: usize,
    /// Link probability for a same-topic pair not already linked by the
    /// block model.
    pub p_topic: f64,
    pub words_per_topic: usize,
    pub shared_words: usize,
    pub posts_per_node: usize,
    pub words_per_post: usize,
    /// Probability that a word is drawn from the node's topic vocabulary
    /// instead of the shared one.
    pub topic_word_rate: f64,
    pub directed: bool,
    pub seed: u64,
}

impl Default for AttributedConfig {
    fn default() -> Self {
        AttributedConfig {
            nodes: 200,
            blocks: 2,
            p_in: 0.05,
            p_out: 0.002,
            topics: 4,
            p_topic: 0.1,
            words_per_topic: 50,
            shared_words: 100,
            posts_per_node: 8,
            words_per_post: 12,
            topic_word_rate: 0.6,
            directed: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttributedGraph {
    pub graph: Graph,
    pub blocks: Vec<u32>,
    pub topics: Vec<u32>,
    /// `(node label, post text)` records.
    pub posts: Vec<(String, String)>,
    pub block_edges: usize,
    pub topic_edges: usize,
}

pub fn attributed_graph(cfg: &AttributedConfig) -> Result<AttributedGraph> {
    check_probability("p_in", cfg.p_in)?;
    check_probability("p_out", cfg.p_out)?;
    check_probability("p_topic", cfg.p_topic)?;
    check_probability("topic_word_rate", cfg.topic_word_rate)?;
    if cfg.blocks == 0 || cfg.topics == 0 || cfg.words_per_topic == 0 || cfg.shared_words == 0 {
        return Err(Error::param(
            "attributed config",
            "blocks, topics and vocabularies must be non-empty",
        ));
    }
    let n = cfg.nodes;
    let mut rng = rng::from_seed(cfg.seed);
    let blocks: Vec<u32> = (0..n).map(|i| (i * cfg.blocks / n.max(1)) as u32).collect();
    // topics cut across blocks
    let topics: Vec<u32> = (0..n).map(|i| (i % cfg.topics) as u32).collect();

    let mut builder = GraphBuilder::new(cfg.directed);
    for i in 0..n {
        builder.add_node(&node_label(i));
    }
    let (mut block_edges, mut topic_edges) = (0, 0);
    for u in 0..n {
        let start = if cfg.directed { 0 } else { u + 1 };
        for v in start..n {
            if u == v {
                continue;
            }
            let same_block = blocks[u] == blocks[v];
            let p = if same_block { cfg.p_in } else { cfg.p_out };
            if rng.gen::<f64>() < p {
                builder.add_edge_ids(u.into(), v.into(), 1.0)?;
                block_edges += 1;
            } else if topics[u] == topics[v] && rng.gen::<f64>() < cfg.p_topic {
                builder.add_edge_ids(u.into(), v.into(), 1.0)?;
                topic_edges += 1;
            }
        }
    }

    let mut posts = Vec::with_capacity(n * cfg.posts_per_node);
    for (i, &topic) in topics.iter().enumerate() {
        for _ in 0..cfg.posts_per_node {
            let mut text = String::new();
            for w in 0..cfg.words_per_post {
                if w > 0 {
                    text.push(' ');
                }
                if rng.gen::<f64>() < cfg.topic_word_rate {
                    text.push_str(&format!("t{}w{}", topic, rng.gen_range(0..cfg.words_per_topic)));
                } else {
                    text.push_str(&format!("s{}", rng.gen_range(0..cfg.shared_words)));
                }
            }
            posts.push((node_label(i), text));
        }
    }

    Ok(AttributedGraph {
        graph: builder.build().0,
        blocks,
        topics,
        posts,
        block_edges,
        topic_edges,
    })
}
