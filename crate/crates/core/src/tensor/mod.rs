//! Dense float64 tensors and a reverse-mode differentiation graph.
//!
//! [`kernels`] holds the raw forward/backward math for each primitive,
//! [`Graph`] records operations and runs backpropagation, and
//! [`AdamState`] applies bias-corrected Adam updates. Reductions always run
//! in a fixed row-major order, so forward and backward results depend only
//! on the input bits.

mod adam;
pub mod gradcheck;
mod graph;
pub mod kernels;

pub use adam::AdamState;
pub use graph::{Graph, GraphNode, NodeId, Op};
pub use kernels::{Activation, PadMode};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Row-major N-dimensional array of `f64`. Image tensors use NCHW order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "tensor extents must be >= 1, got {shape:?}"
            )));
        }
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::InvalidShape(format!(
                "shape {shape:?} holds {numel} elements, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "zero extent in {shape:?}");
        Self {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    /// Tensor of independent normal draws with mean 0.
    pub fn randn<R: Rng + ?Sized>(shape: &[usize], std: f64, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, std).expect("finite std");
        let mut t = Self::zeros(shape);
        for v in &mut t.data {
            *v = normal.sample(rng);
        }
        t
    }

    /// Tensor of independent uniform draws in `[lo, hi)`.
    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], lo: f64, hi: f64, rng: &mut R) -> Self {
        let mut t = Self::zeros(shape);
        for v in &mut t.data {
            *v = rng.random_range(lo..hi);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> f64 {
        assert_eq!(
            self.numel(),
            1,
            "item() on tensor of shape {:?}",
            self.shape
        );
        self.data[0]
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != self.numel() || shape.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Extents of a 4-D tensor.
    pub fn dims4(&self) -> Result<[usize; 4]> {
        match self.shape[..] {
            [n, c, h, w] => Ok([n, c, h, w]),
            _ => Err(Error::InvalidShape(format!(
                "expected a 4-D tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise `self += other`.
    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        same_shape(self, other, "add_assign")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.numel() as f64
    }

    /// Inner product of two tensors of equal shape.
    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        same_shape(self, other, "dot")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Batch item `i` of an NCHW tensor, keeping a leading extent of 1.
    pub fn batch_item(&self, i: usize) -> Result<Tensor> {
        let [n, c, h, w] = self.dims4()?;
        if i >= n {
            return Err(Error::InvalidShape(format!("batch index {i} out of {n}")));
        }
        let len = c * h * w;
        Tensor::new(&[1, c, h, w], self.data[i * len..(i + 1) * len].to_vec())
    }

    /// Concatenates NCHW tensors along the batch axis.
    pub fn stack_batch(items: &[Tensor]) -> Result<Tensor> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidShape("cannot stack an empty batch".into()))?;
        let [_, c, h, w] = first.dims4()?;
        let mut data = Vec::new();
        let mut n = 0;
        for t in items {
            let [tn, tc, th, tw] = t.dims4()?;
            if (tc, th, tw) != (c, h, w) {
                return Err(Error::InvalidShape(format!(
                    "cannot stack {:?} with {:?}",
                    t.shape, first.shape
                )));
            }
            n += tn;
            data.extend_from_slice(&t.data);
        }
        Tensor::new(&[n, c, h, w], data)
    }
}

pub(crate) fn same_shape(a: &Tensor, b: &Tensor, op: &str) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::InvalidShape(format!(
            "{op}: shapes {:?} and {:?} differ",
            a.shape, b.shape
        )));
    }
    Ok(())
}
