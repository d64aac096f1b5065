//! Fully connected layers and small feed-forward networks.
//!
//! Forward passes are pure so trained receivers can run concurrently on
//! shared parameters; training uses the `*_cached` variants, which return
//! the activations a later backward pass needs.

use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::None => x,
            Activation::Relu => relu_scalar(x),
            Activation::Sigmoid => sigmoid_scalar(x),
        }
    }

    /// Derivative expressed through the activation *output* `y = f(x)`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::None => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

pub fn relu_scalar(x: f64) -> f64 {
    x.max(0.0)
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn tanh_scalar(x: f64) -> f64 {
    x.tanh()
}

/// Elementwise ReLU over a tensor.
pub fn relu(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| relu_scalar(v)).collect();
    Tensor::new(x.shape().to_vec(), data).unwrap()
}

/// Elementwise logistic sigmoid over a tensor. Output is strictly in (0, 1)
/// for finite inputs.
pub fn sigmoid(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| sigmoid_scalar(v)).collect();
    Tensor::new(x.shape().to_vec(), data).unwrap()
}

/// One dense layer: `y = f(x W^T + b)` with `W` stored row-major as
/// `[out_dim, in_dim]`.
#[derive(Clone, Debug)]
pub struct DenseLayer {
    pub weights: Tensor,
    pub bias: Option<Tensor>,
    pub activation: Activation,
}

/// Activations recorded by a cached forward pass through one layer.
#[derive(Clone, Debug)]
pub struct DenseCache {
    input: Tensor,
    output: Tensor,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Option<Tensor>, activation: Activation) -> Result<Self> {
        if weights.shape().len() != 2 {
            return Err(Error::Input(format!(
                "dense weights must be rank 2, got shape {:?}",
                weights.shape()
            )));
        }
        if let Some(b) = &bias {
            if b.len() != weights.rows() {
                return Err(Error::dimension(
                    "DenseLayer::new",
                    "bias",
                    weights.rows(),
                    b.len(),
                ));
            }
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(out_dim: usize, in_dim: usize, bias: bool, activation: Activation) -> Self {
        DenseLayer {
            weights: Tensor::zeros(vec![out_dim, in_dim]),
            bias: bias.then(|| Tensor::zeros(vec![out_dim])),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// `[batch, in] -> [batch, out]`. A rank-1 input is treated as a single
    /// row and returned as rank 1.
    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(input)?.0)
    }

    pub fn forward_cached(&self, input: &Tensor) -> Result<(Tensor, DenseCache)> {
        let (batch, in_dim, rank1) = match input.shape() {
            [n] => (1usize, *n, true),
            [b, n] => (*b, *n, false),
            other => {
                return Err(Error::Input(format!(
                    "dense input must be rank 1 or 2, got shape {other:?}"
                )))
            }
        };
        if in_dim != self.in_dim() {
            return Err(Error::dimension(
                "dense_forward",
                "input",
                self.in_dim(),
                in_dim,
            ));
        }
        let out_dim = self.out_dim();
        let mut out = vec![0.0; batch * out_dim];
        let w = self.weights.data();
        let x = input.data();
        for b in 0..batch {
            let xr = &x[b * in_dim..(b + 1) * in_dim];
            let yr = &mut out[b * out_dim..(b + 1) * out_dim];
            for (o, y) in yr.iter_mut().enumerate() {
                let wr = &w[o * in_dim..(o + 1) * in_dim];
                let mut acc = match &self.bias {
                    Some(bias) => bias.data()[o],
                    None => 0.0,
                };
                for (wi, xi) in wr.iter().zip(xr) {
                    acc += wi * xi;
                }
                *y = self.activation.apply(acc);
            }
        }
        let shape = if rank1 {
            vec![out_dim]
        } else {
            vec![batch, out_dim]
        };
        let output = Tensor::new(shape, out)?;
        let cache = DenseCache {
            input: input.clone(),
            output: output.clone(),
        };
        Ok((output, cache))
    }

    /// Backpropagates `grad_out` (same shape as the cached output) through
    /// the layer. Parameter gradients are accumulated into `dw`/`db`;
    /// the returned tensor is the gradient w.r.t. the input.
    pub fn backward(
        &self,
        cache: &DenseCache,
        grad_out: &Tensor,
        dw: &mut [f64],
        mut db: Option<&mut [f64]>,
    ) -> Result<Tensor> {
        if grad_out.shape() != cache.output.shape() {
            return Err(Error::dimension(
                "dense_backward",
                "grad_out",
                cache.output.len(),
                grad_out.len(),
            ));
        }
        debug_assert_eq!(dw.len(), self.weights.len());
        let in_dim = self.in_dim();
        let out_dim = self.out_dim();
        let batch = cache.input.len() / in_dim;
        let x = cache.input.data();
        let y = cache.output.data();
        let g = grad_out.data();
        let w = self.weights.data();
        let mut dx = vec![0.0; cache.input.len()];
        // delta = grad_out * f'(pre-activation), expressed via the output.
        let mut delta = vec![0.0; out_dim];
        for b in 0..batch {
            let xr = &x[b * in_dim..(b + 1) * in_dim];
            let yr = &y[b * out_dim..(b + 1) * out_dim];
            let gr = &g[b * out_dim..(b + 1) * out_dim];
            for o in 0..out_dim {
                delta[o] = gr[o] * self.activation.derivative_from_output(yr[o]);
            }
            if let Some(db) = db.as_deref_mut() {
                for (acc, d) in db.iter_mut().zip(&delta) {
                    *acc += d;
                }
            }
            let dxr = &mut dx[b * in_dim..(b + 1) * in_dim];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let wr = &w[o * in_dim..(o + 1) * in_dim];
                let dwr = &mut dw[o * in_dim..(o + 1) * in_dim];
                for i in 0..in_dim {
                    dwr[i] += d * xr[i];
                    dxr[i] += d * wr[i];
                }
            }
        }
        Tensor::new(cache.input.shape().to_vec(), dx)
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.as_ref().map_or(0, Tensor::len)
    }
}

/// A stack of dense layers applied in order.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

#[derive(Clone, Debug)]
pub struct MlpCache {
    layer_caches: Vec<DenseCache>,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Self {
        Mlp { layers }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: &Tensor) -> Result<(Tensor, MlpCache)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let (y, cache) = layer.forward_cached(&x)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, MlpCache {
            layer_caches: caches,
        }))
    }

    /// Backward through all layers. `grads` must follow this network's
    /// parameter layout (see [`Mlp::visit_params`]): weights then bias (when
    /// present) for each layer in order.
    pub fn backward(
        &self,
        cache: &MlpCache,
        grad_out: &Tensor,
        grads: &mut [Vec<f64>],
    ) -> Result<Tensor> {
        let mut slots: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.layers.len());
        let mut idx = 0;
        for layer in &self.layers {
            let w = idx;
            idx += 1;
            let b = layer.bias.as_ref().map(|_| {
                let i = idx;
                idx += 1;
                i
            });
            slots.push((w, b));
        }
        if idx != grads.len() {
            return Err(Error::dimension("mlp_backward", "grads", idx, grads.len()));
        }
        let mut g = grad_out.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let (wi, bi) = slots[l];
            // Split-borrow the gradient slots for this layer.
            let (dw, db) = if let Some(bi) = bi {
                debug_assert_eq!(bi, wi + 1);
                let (head, tail) = grads.split_at_mut(bi);
                (&mut head[wi], Some(&mut tail[0]))
            } else {
                (&mut grads[wi], None)
            };
            g = layer.backward(
                &cache.layer_caches[l],
                &g,
                dw.as_mut_slice(),
                db.map(|b| b.as_mut_slice()),
            )?;
        }
        Ok(g)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor2(rows: usize, cols: usize, data: &[f64]) -> Tensor {
        Tensor::new(vec![rows, cols], data.to_vec()).unwrap()
    }

    #[test]
    fn identity_weights_pass_input_through() {
        let layer = DenseLayer::new(
            tensor2(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            None,
            Activation::None,
        )
        .unwrap();
        let out = layer.forward(&Tensor::from_vec(vec![2.0, 3.0])).unwrap();
        assert_eq!(out.data(), &[2.0, 3.0]);
    }

    #[test]
    fn sigmoid_of_zero_preactivation_is_half() {
        let layer = DenseLayer::zeros(3, 2, true, Activation::Sigmoid);
        let out = layer.forward(&Tensor::from_vec(vec![0.7, -0.3])).unwrap();
        assert_eq!(out.data(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn matvec_matches_scalar_loop_oracle() {
        // Random-ish fixed 3x2 weights against an independently computed
        // per-entry loop.
        let w = [0.37, -1.2, 0.05, 2.2, -0.9, 0.44];
        let x = [1.3, -0.7];
        let layer = DenseLayer::new(tensor2(3, 2, &w), None, Activation::None).unwrap();
        let out = layer.forward(&Tensor::from_vec(x.to_vec())).unwrap();
        for o in 0..3 {
            let mut expect = 0.0;
            for i in 0..2 {
                expect += w[o * 2 + i] * x[i];
            }
            assert!((out.data()[o] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn input_dim_mismatch_names_axis() {
        let layer = DenseLayer::zeros(2, 3, false, Activation::None);
        let err = layer.forward(&Tensor::from_vec(vec![1.0, 2.0])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("input") && msg.contains("expects 3"), "{msg}");
    }

    #[test]
    fn relu_clamps_negatives_only() {
        let x = Tensor::from_vec(vec![-1.5, 2.0, 0.0]);
        assert_eq!(relu(&x).data(), &[0.0, 2.0, 0.0]);
    }

    #[test]
    fn sigmoid_saturates_toward_zero_one() {
        let x = Tensor::from_vec(vec![20.0, -20.0]);
        let y = sigmoid(&x);
        assert!((y.data()[0] - 1.0).abs() < 1e-8);
        assert!(y.data()[1] < 1e-8);
        assert!(y.data()[1] > 0.0, "sigmoid stays strictly positive");
    }

    #[test]
    fn batch_rows_are_independent() {
        let layer = DenseLayer::new(
            tensor2(1, 2, &[1.0, -1.0]),
            Some(Tensor::from_vec(vec![0.5])),
            Activation::Relu,
        )
        .unwrap();
        let out = layer
            .forward(&tensor2(2, 2, &[1.0, 0.0, 0.0, 2.0]))
            .unwrap();
        assert_eq!(out.shape(), &[2, 1]);
        assert_eq!(out.data(), &[1.5, 0.0]);
    }
}
