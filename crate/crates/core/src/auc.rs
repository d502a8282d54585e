//! Area under the ROC curve as the probability that a positive pair
//! outscores a negative one, ties counting one half: `(n' + 0.5 n'') / n`.

use alloc::vec::Vec;

use rand::Rng;

use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AucMode {
    /// Every positive/negative cross pair.
    Exact,
    /// `draws` uniformly random cross pairs.
    Sampled { draws: usize, seed: u64 },
}

/// Raw comparison counts behind an AUC value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AucCounts {
    pub higher: u64,
    pub equal: u64,
    pub total: u64,
}

impl AucCounts {
    pub fn value(&self) -> f64 {
        (self.higher as f64 + 0.5 * self.equal as f64) / self.total as f64
    }
}

pub fn auc(positive: &[f64], negative: &[f64], mode: AucMode) -> Result<f64> {
    auc_counts(positive, negative, mode).map(|c| c.value())
}

pub fn auc_counts(positive: &[f64], negative: &[f64], mode: AucMode) -> Result<AucCounts> {
    if positive.is_empty() {
        return Err(Error::EmptyInput("positive scores"));
    }
    if negative.is_empty() {
        return Err(Error::EmptyInput("negative scores"));
    }
    if positive.iter().chain(negative).any(|s| s.is_nan()) {
        return Err(Error::NanScore);
    }
    Ok(match mode {
        AucMode::Exact => exact(positive, negative),
        AucMode::Sampled { draws, seed } => {
            if draws == 0 {
                return Err(Error::param("draws", "must be at least 1"));
            }
            sampled(positive, negative, draws, seed)
        }
    })
}

fn exact(positive: &[f64], negative: &[f64]) -> AucCounts {
    let mut sorted: Vec<f64> = negative.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut counts = AucCounts {
        total: positive.len() as u64 * negative.len() as u64,
        ..AucCounts::default()
    };
    for &p in positive {
        let below = sorted.partition_point(|&n| n < p);
        let not_above = sorted.partition_point(|&n| n <= p);
        counts.higher += below as u64;
        counts.equal += (not_above - below) as u64;
    }
    counts
}

fn sampled(positive: &[f64], negative: &[f64], draws: usize, seed: u64) -> AucCounts {
    let mut rng = rng::from_seed(seed);
    let mut counts = AucCounts {
        total: draws as u64,
        ..AucCounts::default()
    };
    for _ in 0..draws {
        let p = positive[rng.gen_range(0..positive.len())];
        let n = negative[rng.gen_range(0..negative.len())];
        if p > n {
            counts.higher += 1;
        } else if p == n {
            counts.equal += 1;
        }
    }
    counts
}
