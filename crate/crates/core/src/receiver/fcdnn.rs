//! Data-driven baseline receiver: eight fully connected networks that map
//! the raw received pilot and data observations straight to bits, with no
//! channel-estimation or detection structure.

use num_complex::Complex64;

use crate::cplx::realify;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Mlp, Parameterized, Tensor};

pub use super::sd_fc::{BITS_PER_GROUP, GROUPS};

/// Stacked real/imaginary parts of `y_pilot || y_data`.
pub const INPUT_DIM: usize = 256;
pub const HIDDEN_LAYERS: [usize; 3] = [500, 250, 120];

#[derive(Clone, Debug)]
pub struct FcDnnReceiver {
    pub groups: Vec<Mlp>,
}

impl FcDnnReceiver {
    pub fn zeros() -> Self {
        let groups = (0..GROUPS)
            .map(|_| {
                Mlp::new(vec![
                    DenseLayer::zeros(HIDDEN_LAYERS[0], INPUT_DIM, true, Activation::Relu),
                    DenseLayer::zeros(HIDDEN_LAYERS[1], HIDDEN_LAYERS[0], true, Activation::Relu),
                    DenseLayer::zeros(HIDDEN_LAYERS[2], HIDDEN_LAYERS[1], true, Activation::Relu),
                    DenseLayer::zeros(BITS_PER_GROUP, HIDDEN_LAYERS[2], true, Activation::Sigmoid),
                ])
            })
            .collect();
        FcDnnReceiver { groups }
    }

    /// The 256-real input every group network consumes.
    pub fn input_features(y_pilot: &[Complex64], y_data: &[Complex64]) -> Vec<f64> {
        let mut joint = Vec::with_capacity(y_pilot.len() + y_data.len());
        joint.extend_from_slice(y_pilot);
        joint.extend_from_slice(y_data);
        realify(&joint)
    }

    /// 384 soft bits (each group predicts its own 48).
    pub fn forward(&self, y_pilot: &[Complex64], y_data: &[Complex64]) -> Result<Vec<f64>> {
        if y_pilot.len() != 64 || y_data.len() != 64 {
            return Err(Error::dimension(
                "fcdnn_forward",
                "subcarriers",
                64,
                y_pilot.len().min(y_data.len()),
            ));
        }
        let input = Tensor::from_vec(Self::input_features(y_pilot, y_data));
        let mut soft = Vec::with_capacity(GROUPS * BITS_PER_GROUP);
        for net in &self.groups {
            let out = net.forward(&input)?;
            soft.extend_from_slice(out.data());
        }
        Ok(soft)
    }

    pub fn param_count(&self) -> usize {
        self.groups.iter().map(Mlp::param_count).sum()
    }
}

impl Parameterized for FcDnnReceiver {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (g, net) in self.groups.iter().enumerate() {
            for n in net.param_names() {
                names.push(format!("group{g}.{n}"));
            }
        }
        names
    }

    fn params(&self) -> Vec<&Tensor> {
        self.groups.iter().flat_map(Parameterized::params).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.groups
            .iter_mut()
            .flat_map(Parameterized::params_mut)
            .collect()
    }
}
