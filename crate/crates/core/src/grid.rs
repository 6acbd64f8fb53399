//! Multilevel index bookkeeping.
//!
//! A multilevel vector with dims `n = (n_1, .., n_k)` has `N(n) = n_1 * .. * n_k`
//! entries; level 1 varies fastest.

use crate::{Error, Result};

/// Validated multilevel dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("no levels".into()));
        }
        if let Some(level) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidDims(format!(
                "level {} has size 0",
                level + 1
            )));
        }
        Ok(Dims(dims.to_vec()))
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }

    /// Total number of entries `N(n)`.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn level(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Linear offset of a multi-index (level 1 fastest).
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.0.len());
        let mut off = 0;
        for (&i, &n) in idx.iter().zip(&self.0).rev() {
            off = off * n + i;
        }
        off
    }

    /// Multi-index of a linear offset.
    pub fn unravel(&self, mut off: usize) -> Vec<usize> {
        self.0
            .iter()
            .map(|&n| {
                let i = off % n;
                off /= n;
                i
            })
            .collect()
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        let expected = self.total();
        if len != expected {
            return Err(Error::DimensionMismatch { expected, got: len });
        }
        Ok(())
    }
}

/// Stride of level `axis` in a level-1-fastest layout with the given shape.
pub(crate) fn stride(shape: &[usize], axis: usize) -> usize {
    shape[..axis].iter().product()
}

/// Reverses the entries end to end. This is the multilevel anti-identity
/// `Y_n = Y_{n_1} ⊗ .. ⊗ Y_{n_k}`, which coincides with the full reversal.
pub fn flip(x: &[f64]) -> Vec<f64> {
    x.iter().rev().copied().collect()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
