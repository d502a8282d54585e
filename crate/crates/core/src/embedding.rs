//! Dense row-major embedding storage.

use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::math::check_dims;
use crate::{Error, Result};

/// One `dim`-sized vector per row. Row `i` belongs to node (or document) `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            check_dims(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(EmbeddingMatrix {
            rows: rows.len(),
            dim,
            data,
        })
    }

    /// word2vec-style initialization: every entry uniform in `[-0.5/dim, 0.5/dim)`.
    pub fn uniform<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Self {
        let scale = 1.0 / dim as f64;
        let data = (0..rows * dim).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect();
        EmbeddingMatrix { rows, dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize) -> Result<&[f64]> {
        if i < self.rows() {
            Ok(self.row(i))
        } else {
            Err(Error::UnknownNode(i as u32))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Matrix of `f64` stored as atomic bit patterns so several trainer threads
/// can update it without locks. Updates are relaxed load/store pairs, so
/// concurrent writers may overwrite each other (Hogwild-style); with one
/// writer the result is deterministic.
pub struct SharedMatrix {
    rows: usize,
    dim: usize,
    cells: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub fn from_matrix(m: &EmbeddingMatrix) -> Self {
        SharedMatrix {
            rows: m.rows,
            dim: m.dim,
            cells: m.data.iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self::from_matrix(&EmbeddingMatrix::zeros(rows, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn load(&self, row: usize, out: &mut [f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    pub fn store(&self, row: usize, values: &[f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, v) in cells.iter().zip(values) {
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn add(&self, row: usize, delta: &[f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, d) in cells.iter().zip(delta) {
            let v = f64::from_bits(c.load(Ordering::Relaxed)) + d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn into_matrix(self) -> EmbeddingMatrix {
        EmbeddingMatrix {
            rows: self.rows,
            dim: self.dim,
            data: self.cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect(),
        }
    }
}
