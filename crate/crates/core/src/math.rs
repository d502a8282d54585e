//! Small dense-vector helpers shared by the trainers.

use crate::{Error, Result};

/// Logits are clipped to this magnitude before exponentiation.
pub const MAX_EXP: f64 = 6.0;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Sigmoid of `x` clipped to `[-MAX_EXP, MAX_EXP]`.
#[inline]
pub fn clipped_sigmoid(x: f64) -> f64 {
    sigmoid(x.clamp(-MAX_EXP, MAX_EXP))
}

/// `ln(sigmoid(x))`, stable for large negative `x`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p(libm::exp(-x))
    } else {
        x - libm::log1p(libm::exp(x))
    }
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Index of the first entry of an ascending cumulative table that exceeds `target`.
pub(crate) fn search_cumulative(cumulative: &[f64], target: f64) -> usize {
    let idx = cumulative.partition_point(|&c| c <= target);
    idx.min(cumulative.len() - 1)
}
