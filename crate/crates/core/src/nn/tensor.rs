//! Dense n-dimensional real tensor with an optional gradient buffer.
//!
//! All network math runs in f64; the complexity report separately assumes
//! 4-byte storage when converting parameter counts to memory.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    /// Builds a tensor, checking that `product(shape) == data.len()`.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::dimension("Tensor::new", "data", expected, data.len()));
        }
        Ok(Tensor {
            shape,
            data,
            grad: None,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; len],
            grad: None,
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
            grad: None,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
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

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    /// Row `r` of a rank-2 tensor as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    /// Gradient buffer, allocated as zeros on first use. Always matches the
    /// tensor's own shape.
    pub fn grad_mut(&mut self) -> &mut [f64] {
        if self.grad.is_none() {
            self.grad = Some(vec![0.0; self.data.len()]);
        }
        self.grad.as_deref_mut().unwrap()
    }

    pub fn clear_grad(&mut self) {
        self.grad = None;
    }

    /// Accumulates `g` into the gradient buffer.
    pub fn add_grad(&mut self, g: &[f64]) {
        debug_assert_eq!(g.len(), self.data.len());
        let buf = self.grad_mut();
        for (b, v) in buf.iter_mut().zip(g) {
            *b += v;
        }
    }
}
