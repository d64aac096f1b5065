//! Fully connected detection subnet: eight independent two-layer networks,
//! one per block of eight consecutive subcarriers, refining the ZF solution
//! into 48 soft bits each.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Mlp, Parameterized, Tensor};

pub const GROUPS: usize = 8;
pub const GROUP_SIZE: usize = 8;
pub const BITS_PER_GROUP: usize = 48;
pub const HIDDEN: usize = 120;

/// 16 reals: the group's ZF symbols stacked `[Re x 8, Im x 8]`.
pub const BASE_FEATURES: usize = 2 * GROUP_SIZE;
/// 48 reals: ZF symbols plus the group's received data and channel
/// estimate, each stacked the same way.
pub const EXTENDED_FEATURES: usize = 6 * GROUP_SIZE;

#[derive(Clone, Debug)]
pub struct FcSdSubnet {
    pub groups: Vec<Mlp>,
    /// When set, the inputs also carry the group's `y_D` and `h_hat`
    /// alongside the ZF symbols.
    pub extended_features: bool,
}

fn stack_group(dst: &mut Vec<f64>, v: &[Complex64], g: usize) {
    let base = g * GROUP_SIZE;
    for k in 0..GROUP_SIZE {
        dst.push(v[base + k].re);
    }
    for k in 0..GROUP_SIZE {
        dst.push(v[base + k].im);
    }
}

impl FcSdSubnet {
    pub fn zeros(extended_features: bool) -> Self {
        let in_dim = if extended_features {
            EXTENDED_FEATURES
        } else {
            BASE_FEATURES
        };
        let groups = (0..GROUPS)
            .map(|_| {
                Mlp::new(vec![
                    DenseLayer::zeros(HIDDEN, in_dim, true, Activation::Relu),
                    DenseLayer::zeros(BITS_PER_GROUP, HIDDEN, true, Activation::Sigmoid),
                ])
            })
            .collect();
        FcSdSubnet {
            groups,
            extended_features,
        }
    }

    pub fn input_dim(&self) -> usize {
        if self.extended_features {
            EXTENDED_FEATURES
        } else {
            BASE_FEATURES
        }
    }

    /// Input vector of group `g`.
    pub fn group_features(
        &self,
        g: usize,
        x_zf: &[Complex64],
        h_hat: &[Complex64],
        y_data: &[Complex64],
    ) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.input_dim());
        stack_group(&mut out, x_zf, g);
        if self.extended_features {
            stack_group(&mut out, y_data, g);
            stack_group(&mut out, h_hat, g);
        }
        out
    }

    /// 384 soft bits in (0, 1), subcarrier-major and bit-minor: entry
    /// `6k + b` is bit `b` of subcarrier `k`.
    pub fn forward(
        &self,
        x_zf: &[Complex64],
        h_hat: &[Complex64],
        y_data: &[Complex64],
    ) -> Result<Vec<f64>> {
        if x_zf.len() != GROUPS * GROUP_SIZE
            || h_hat.len() != x_zf.len()
            || y_data.len() != x_zf.len()
        {
            return Err(Error::dimension(
                "sd_forward_fc",
                "subcarriers",
                GROUPS * GROUP_SIZE,
                x_zf.len().min(h_hat.len()).min(y_data.len()),
            ));
        }
        let mut soft = Vec::with_capacity(GROUPS * BITS_PER_GROUP);
        for (g, net) in self.groups.iter().enumerate() {
            let input = Tensor::from_vec(self.group_features(g, x_zf, h_hat, y_data));
            let out = net.forward(&input)?;
            soft.extend_from_slice(out.data());
        }
        Ok(soft)
    }

    pub fn param_count(&self) -> usize {
        self.groups.iter().map(Mlp::param_count).sum()
    }
}

impl Parameterized for FcSdSubnet {
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
