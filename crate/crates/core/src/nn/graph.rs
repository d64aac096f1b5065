//! Stateful forward/backward session over a feed-forward network.
//!
//! The computation graph is static per subnet: a session records exactly one
//! forward pass, `backward` consumes it and populates the parameter gradient
//! buffers, and the session must be `reset` before it can be reused.

use super::adam::AdamState;
use super::dense::{Mlp, MlpCache};
use super::params::Parameterized;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MlpGraph {
    pub net: Mlp,
    tape: Option<MlpCache>,
}

impl MlpGraph {
    pub fn new(net: Mlp) -> Self {
        MlpGraph { net, tape: None }
    }

    /// Runs and records a forward pass. Fails if a recorded pass is still
    /// pending; call [`MlpGraph::reset`] (or `backward`) first.
    pub fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        if self.tape.is_some() {
            return Err(Error::State(
                "graph already holds a recorded forward pass; reset before reuse".into(),
            ));
        }
        let (out, cache) = self.net.forward_cached(input)?;
        self.tape = Some(cache);
        Ok(out)
    }

    /// Backpropagates `grad_out` through the recorded pass, accumulating
    /// into each parameter's gradient buffer. Consumes the recorded pass.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let cache = self.tape.take().ok_or_else(|| {
            Error::State("backward called before forward: no recorded pass".into())
        })?;
        let mut grads: Vec<Vec<f64>> = self
            .net
            .params()
            .iter()
            .map(|p| vec![0.0; p.len()])
            .collect();
        let d_input = self.net.backward(&cache, grad_out, &mut grads)?;
        for (param, g) in self.net.params_mut().into_iter().zip(&grads) {
            param.add_grad(g);
        }
        Ok(d_input)
    }

    /// Clears the recorded pass and all parameter gradient buffers.
    pub fn reset(&mut self) {
        self.tape = None;
        for p in self.net.params_mut() {
            p.clear_grad();
        }
    }
}

/// Applies one Adam step using the gradients accumulated in the network's
/// parameter gradient buffers (as populated by [`MlpGraph::backward`]).
pub fn adam_step_from_grad_slots<N: Parameterized>(
    net: &mut N,
    state: &mut AdamState,
    learning_rate: f64,
) -> Result<()> {
    let grads: Vec<Vec<f64>> = net
        .params()
        .iter()
        .map(|p| {
            p.grad().map(<[f64]>::to_vec).ok_or_else(|| {
                Error::State("parameter gradient not populated; run backward first".into())
            })
        })
        .collect::<Result<_>>()?;
    let mut params = net.params_mut();
    state.step(&mut params, &grads, learning_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::dense::{Activation, DenseLayer};
    use crate::nn::loss::{mse_grad, mse_loss};

    fn one_by_one(w: f64) -> MlpGraph {
        let mut layer = DenseLayer::zeros(1, 1, false, Activation::None);
        layer.weights.data_mut()[0] = w;
        MlpGraph::new(Mlp::new(vec![layer]))
    }

    #[test]
    fn backward_before_forward_is_a_state_error() {
        let mut graph = one_by_one(0.5);
        let err = graph.backward(&Tensor::from_vec(vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::State(_)), "{err}");
    }

    #[test]
    fn scalar_mse_gradient_matches_hand_derivative() {
        // loss = (w x - y)^2, d/dw = 2 x (w x - y).
        let (w, x, y) = (0.8, 1.7, -0.4);
        let mut graph = one_by_one(w);
        let input = Tensor::from_vec(vec![x]);
        let target = Tensor::from_vec(vec![y]);
        let out = graph.forward(&input).unwrap();
        assert!((out.data()[0] - w * x).abs() < 1e-15);
        let g = mse_grad(&out, &target).unwrap();
        graph.backward(&g).unwrap();
        let got = graph.net.layers[0].weights.grad().unwrap()[0];
        let want = 2.0 * x * (w * x - y);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        let _ = mse_loss(&out, &target).unwrap();
    }

    #[test]
    fn dead_relu_region_gives_all_zero_gradients() {
        // Output is constant (0) in a neighbourhood: every gradient is 0.
        let mut hidden = DenseLayer::zeros(2, 1, true, Activation::Relu);
        hidden.weights.data_mut().copy_from_slice(&[-1.0, -2.0]);
        hidden
            .bias
            .as_mut()
            .unwrap()
            .data_mut()
            .copy_from_slice(&[-0.5, -0.5]);
        let mut out = DenseLayer::zeros(1, 2, false, Activation::None);
        out.weights.data_mut().copy_from_slice(&[1.0, 1.0]);
        let mut graph = MlpGraph::new(Mlp::new(vec![hidden, out]));

        let pred = graph.forward(&Tensor::from_vec(vec![2.0])).unwrap();
        assert_eq!(pred.data(), &[0.0]);
        let g = mse_grad(&pred, &Tensor::from_vec(vec![1.0])).unwrap();
        graph.backward(&g).unwrap();
        for p in graph.net.params() {
            assert!(p.grad().unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn reuse_without_reset_is_rejected_then_allowed() {
        let mut graph = one_by_one(1.0);
        let x = Tensor::from_vec(vec![1.0]);
        graph.forward(&x).unwrap();
        assert!(matches!(graph.forward(&x), Err(Error::State(_))));
        graph.reset();
        graph.forward(&x).unwrap();
    }
}
