//! Recurrent detection subnet: eight independent group networks, each a
//! three-layer bidirectional LSTM over all 64 subcarrier positions
//! followed by one sigmoid head that reads its group's eight positions.
//!
//! Running the full sequence through every group network lets each group
//! exploit inter-subcarrier interference context from the whole symbol
//! while the eight detectors stay independent end to end.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nn::dense::DenseCache;
use crate::nn::lstm::BiLstmCache;
use crate::nn::{Activation, BiLstmStack, DenseLayer, Parameterized, Tensor};

pub use super::sd_fc::{BITS_PER_GROUP, GROUPS, GROUP_SIZE};

/// Per-position features: `[Re zf, Im zf, Re y, Im y, Re h, Im h]`.
pub const STEP_FEATURES: usize = 6;
pub const HIDDEN_SIZES: [usize; 3] = [20, 10, 6];
/// Concatenated bidirectional output width of the last layer.
pub const STEP_OUTPUT: usize = 2 * HIDDEN_SIZES[2];
/// Head input: one group's worth of per-position outputs.
pub const HEAD_INPUT: usize = GROUP_SIZE * STEP_OUTPUT;
/// Parameter slots per group network: six per bidirectional layer plus the
/// head weight and bias.
pub const PARAMS_PER_GROUP: usize = 6 * HIDDEN_SIZES.len() + 2;

#[derive(Clone, Debug)]
pub struct BiLstmGroupNet {
    pub stack: BiLstmStack,
    pub head: DenseLayer,
}

#[derive(Clone, Debug)]
pub struct BiLstmSdSubnet {
    pub groups: Vec<BiLstmGroupNet>,
}

/// Forward activations of one group network, consumed by the backward pass.
pub struct BiLstmGroupCache {
    stack: BiLstmCache,
    stack_out: Tensor,
    head: DenseCache,
}

impl BiLstmSdSubnet {
    pub fn zeros() -> Self {
        let groups = (0..GROUPS)
            .map(|_| BiLstmGroupNet {
                stack: BiLstmStack::zeros(STEP_FEATURES, &HIDDEN_SIZES),
                head: DenseLayer::zeros(BITS_PER_GROUP, HEAD_INPUT, true, Activation::Sigmoid),
            })
            .collect();
        BiLstmSdSubnet { groups }
    }

    /// `[64, 6]` per-position feature sequence shared by all groups.
    pub fn features(
        x_zf: &[Complex64],
        h_hat: &[Complex64],
        y_data: &[Complex64],
    ) -> Result<Tensor> {
        let n = GROUPS * GROUP_SIZE;
        if x_zf.len() != n || h_hat.len() != n || y_data.len() != n {
            return Err(Error::dimension(
                "sd_forward_bilstm",
                "subcarriers",
                n,
                x_zf.len().min(h_hat.len()).min(y_data.len()),
            ));
        }
        let mut data = Vec::with_capacity(n * STEP_FEATURES);
        for k in 0..n {
            data.push(x_zf[k].re);
            data.push(x_zf[k].im);
            data.push(y_data[k].re);
            data.push(y_data[k].im);
            data.push(h_hat[k].re);
            data.push(h_hat[k].im);
        }
        Tensor::new(vec![n, STEP_FEATURES], data)
    }

    fn head_input(stack_out: &Tensor, g: usize) -> Tensor {
        let mut concat = Vec::with_capacity(HEAD_INPUT);
        for k in 0..GROUP_SIZE {
            concat.extend_from_slice(stack_out.row(g * GROUP_SIZE + k));
        }
        Tensor::from_vec(concat)
    }

    /// Soft bits of one group from precomputed features.
    pub fn group_forward(&self, g: usize, features: &Tensor) -> Result<Tensor> {
        let net = &self.groups[g];
        let stack_out = net.stack.forward(features)?;
        net.head.forward(&Self::head_input(&stack_out, g))
    }

    pub fn group_forward_cached(
        &self,
        g: usize,
        features: &Tensor,
    ) -> Result<(Tensor, BiLstmGroupCache)> {
        let net = &self.groups[g];
        let (stack_out, stack_cache) = net.stack.forward_cached(features)?;
        let (out, head_cache) = net.head.forward_cached(&Self::head_input(&stack_out, g))?;
        Ok((
            out,
            BiLstmGroupCache {
                stack: stack_cache,
                stack_out,
                head: head_cache,
            },
        ))
    }

    /// Backward for one group. `grads` must be that group's
    /// [`PARAMS_PER_GROUP`] slots in parameter order (stack then head).
    pub fn group_backward(
        &self,
        g: usize,
        cache: &BiLstmGroupCache,
        grad_out: &Tensor,
        grads: &mut [Vec<f64>],
    ) -> Result<()> {
        if grads.len() != PARAMS_PER_GROUP {
            return Err(Error::dimension(
                "bilstm_group_backward",
                "grads",
                PARAMS_PER_GROUP,
                grads.len(),
            ));
        }
        let net = &self.groups[g];
        let (stack_grads, head_grads) = grads.split_at_mut(PARAMS_PER_GROUP - 2);
        let (hw, hb) = head_grads.split_at_mut(1);
        let d_concat = net.head.backward(
            &cache.head,
            grad_out,
            hw[0].as_mut_slice(),
            Some(hb[0].as_mut_slice()),
        )?;
        // Scatter the 96 gradient entries back to the group's positions.
        let steps = cache.stack_out.rows();
        let mut d_seq = Tensor::zeros(vec![steps, STEP_OUTPUT]);
        for k in 0..GROUP_SIZE {
            let pos = g * GROUP_SIZE + k;
            d_seq.data_mut()[pos * STEP_OUTPUT..(pos + 1) * STEP_OUTPUT]
                .copy_from_slice(&d_concat.data()[k * STEP_OUTPUT..(k + 1) * STEP_OUTPUT]);
        }
        net.stack.backward(&cache.stack, &d_seq, stack_grads)?;
        Ok(())
    }

    /// 384 soft bits, same ordering as the FC subnet.
    pub fn forward(
        &self,
        x_zf: &[Complex64],
        h_hat: &[Complex64],
        y_data: &[Complex64],
    ) -> Result<Vec<f64>> {
        let features = Self::features(x_zf, h_hat, y_data)?;
        let mut soft = Vec::with_capacity(GROUPS * BITS_PER_GROUP);
        for g in 0..GROUPS {
            let out = self.group_forward(g, &features)?;
            soft.extend_from_slice(out.data());
        }
        Ok(soft)
    }

    pub fn param_count(&self) -> usize {
        self.groups
            .iter()
            .map(|n| n.stack.param_count() + n.head.param_count())
            .sum()
    }
}

impl Parameterized for BiLstmSdSubnet {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (g, net) in self.groups.iter().enumerate() {
            for n in net.stack.param_names() {
                names.push(format!("group{g}.lstm.{n}"));
            }
            names.push(format!("group{g}.head.weight"));
            names.push(format!("group{g}.head.bias"));
        }
        names
    }

    fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for net in &self.groups {
            out.extend(net.stack.params());
            out.push(&net.head.weights);
            out.push(net.head.bias.as_ref().unwrap());
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for net in &mut self.groups {
            out.extend(net.stack.params_mut());
            out.push(&mut net.head.weights);
            out.push(net.head.bias.as_mut().unwrap());
        }
        out
    }
}
