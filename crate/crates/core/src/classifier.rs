//! Binary logistic regression fitted by mini-batch SGD.
//!
//! The objective is mean cross-entropy plus `l2/2 · ‖w‖²` (the bias is not
//! penalized). The step size for epoch `t` (1-based) is `lr·s/√t`, where the
//! scale `s` starts at 1 and halves whenever an epoch would increase the
//! full-data objective; such an epoch is discarded, so the recorded loss
//! never goes up.
//!
//! With `standardize` set, training runs on z-scored features and the fitted
//! weights are mapped back afterwards, so the returned model always acts on
//! raw features. Embedding blocks of very different scale (structural vs
//! content) otherwise leave the smaller block effectively unused.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::math::{check_dims, dot, log_sigmoid, sigmoid};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            lr: 0.1,
            epochs: 300,
            l2: 1e-4,
            batch_size: 32,
            standardize: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    fn logit(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dims(self.dim(), x.len())?;
        Ok(sigmoid(self.logit(x)))
    }

    pub fn predict_all(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

pub fn predict(model: &LogisticModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Objective over the rows listed in `rows`.
pub fn objective(model: &LogisticModel, features: &[Vec<f64>], labels: &[u8], rows: &[usize], l2: f64) -> f64 {
    let data: f64 = rows
        .iter()
        .map(|&i| {
            let z = model.logit(&features[i]);
            if labels[i] == 1 {
                -log_sigmoid(z)
            } else {
                -log_sigmoid(-z)
            }
        })
        .sum();
    data / rows.len() as f64 + 0.5 * l2 * dot(&model.weights, &model.weights)
}

/// Gradient of [`objective`]: `(∂/∂w, ∂/∂b)`.
pub fn gradient(
    model: &LogisticModel,
    features: &[Vec<f64>],
    labels: &[u8],
    rows: &[usize],
    l2: f64,
) -> (Vec<f64>, f64) {
    let mut gw = vec![0.0; model.dim()];
    let mut gb = 0.0;
    for &i in rows {
        let residual = sigmoid(model.logit(&features[i])) - labels[i] as f64;
        for (g, x) in gw.iter_mut().zip(&features[i]) {
            *g += residual * x;
        }
        gb += residual;
    }
    let n = rows.len() as f64;
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub model: LogisticModel,
    /// Full-data objective before training and after every epoch.
    pub loss_history: Vec<f64>,
}

pub fn train_classifier(features: &[Vec<f64>], labels: &[u8], cfg: &ClassifierConfig) -> Result<TrainedClassifier> {
    check_dims(features.len(), labels.len())?;
    if features.is_empty() {
        return Err(Error::EmptyInput("training examples"));
    }
    let dim = features[0].len();
    for x in features {
        check_dims(dim, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("features", "must be finite"));
        }
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::param("labels", "must be 0 or 1"));
    }
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::SingleClass);
    }
    if cfg.batch_size == 0 {
        return Err(Error::param("batch_size", "must be at least 1"));
    }
    if !(cfg.lr > 0.0 && cfg.l2 >= 0.0) {
        return Err(Error::param("lr", "need lr > 0 and l2 >= 0"));
    }

    let scaling = if cfg.standardize {
        Some(Scaling::fit(features))
    } else {
        None
    };
    let scaled: Vec<Vec<f64>>;
    let features = match &scaling {
        Some(sc) => {
            scaled = features.iter().map(|x| sc.apply(x)).collect();
            &scaled[..]
        }
        None => features,
    };

    let all: Vec<usize> = (0..features.len()).collect();
    let mut order = all.clone();
    let mut rng = rng::from_seed(cfg.seed);
    let mut model = LogisticModel::zeros(dim);
    let mut loss = objective(&model, features, labels, &all, cfg.l2);
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    history.push(loss);
    let mut scale = 1.0;

    for epoch in 0..cfg.epochs {
        let lr = cfg.lr * scale / libm::sqrt((epoch + 1) as f64);
        let mut candidate = model.clone();
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (gw, gb) = gradient(&candidate, features, labels, batch, cfg.l2);
            for (w, g) in candidate.weights.iter_mut().zip(&gw) {
                *w -= lr * g;
            }
            candidate.bias -= lr * gb;
        }
        let candidate_loss = objective(&candidate, features, labels, &all, cfg.l2);
        if candidate_loss <= loss {
            model = candidate;
            loss = candidate_loss;
        } else {
            scale *= 0.5;
        }
        history.push(loss);
    }
    if let Some(sc) = &scaling {
        model = sc.unapply(&model);
    }
    Ok(TrainedClassifier {
        model,
        loss_history: history,
    })
}

/// Per-feature mean and standard deviation; constant features get scale 1.
struct Scaling {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Scaling {
    fn fit(features: &[Vec<f64>]) -> Self {
        let n = features.len() as f64;
        let dim = features[0].len();
        let mut mean = vec![0.0; dim];
        for x in features {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for x in features {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = libm::sqrt(v);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Scaling { mean, scale }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    /// `w·z + b` with `z = (x - μ)/σ` rewritten as `w'·x + b'`.
    fn unapply(&self, model: &LogisticModel) -> LogisticModel {
        let weights: Vec<f64> = model.weights.iter().zip(&self.scale).map(|(w, s)| w / s).collect();
        let shift = dot(&weights, &self.mean);
        LogisticModel {
            weights,
            bias: model.bias - shift,
        }
    }
}
