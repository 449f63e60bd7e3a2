//! Flat parameter views shared by every trainable model.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Parameter groups with independently configurable learning rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGroup {
    /// Circuit rotation angles (pre-tanh).
    Theta,
    /// Classical readout over per-qubit expectations.
    Readout,
    /// Dimensionality-reducing linear encoder.
    Encoder,
    /// Log standard deviation of a Gaussian policy.
    LogStd,
    /// Weights and biases of a classical network.
    Weights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBlock {
    pub group: ParamGroup,
    pub len: usize,
}

/// A model whose parameters can be gathered into and scattered from one
/// flat vector. Gradients use the same order.
pub trait Model {
    fn layout(&self) -> Vec<ParamBlock>;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, flat: &[f64]);

    fn num_params(&self) -> usize {
        self.layout().iter().map(|b| b.len).sum()
    }
}

/// Group tag of every flat index.
pub fn groups_of(layout: &[ParamBlock]) -> Vec<ParamGroup> {
    layout
        .iter()
        .flat_map(|b| core::iter::repeat_n(b.group, b.len))
        .collect()
}

/// Slices `flat` into per-block chunks.
pub fn split<'a>(layout: &[ParamBlock], flat: &'a [f64]) -> Vec<(ParamGroup, &'a [f64])> {
    let mut out = Vec::with_capacity(layout.len());
    let mut at = 0;
    for block in layout {
        out.push((block.group, &flat[at..at + block.len]));
        at += block.len;
    }
    out
}

pub(crate) struct Cursor<'a> {
    flat: &'a [f64],
    at: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(flat: &'a [f64]) -> Self {
        Self { flat, at: 0 }
    }

    pub(crate) fn fill(&mut self, dst: &mut [f64]) {
        dst.copy_from_slice(&self.flat[self.at..self.at + dst.len()]);
        self.at += dst.len();
    }
}
