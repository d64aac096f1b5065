//! Channel-estimation subnet: the LS estimate refined by a single linear
//! 128-to-128 layer (no bias, no activation) that starts from the real
//! LMMSE weight matrix.

use num_complex::Complex64;

use crate::baseline::LmmseWeights;
use crate::cplx::{derealify, realify};
use crate::error::Result;
use crate::nn::{Activation, DenseLayer, Parameterized, Tensor};

pub const CE_DIM: usize = 128;

#[derive(Clone, Debug)]
pub struct CeSubnet {
    pub refine: DenseLayer,
}

impl CeSubnet {
    /// Weights are an exact copy of the real LMMSE block matrix, so the
    /// untrained subnet reproduces the LMMSE estimator.
    pub fn from_lmmse(weights: &LmmseWeights) -> Self {
        let dim = 2 * weights.dim;
        let w = Tensor::new(vec![dim, dim], weights.real_matrix.clone()).unwrap();
        CeSubnet {
            refine: DenseLayer::new(w, None, Activation::None).unwrap(),
        }
    }

    /// Identity refiner (passes the LS estimate through); test helper.
    pub fn identity(dim: usize) -> Self {
        let mut w = Tensor::zeros(vec![dim, dim]);
        for k in 0..dim {
            w.data_mut()[k * dim + k] = 1.0;
        }
        CeSubnet {
            refine: DenseLayer::new(w, None, Activation::None).unwrap(),
        }
    }

    /// Refines a complex LS channel estimate: stack, apply the linear
    /// layer, unstack.
    pub fn forward(&self, h_ls: &[Complex64]) -> Result<Vec<Complex64>> {
        let stacked = Tensor::from_vec(realify(h_ls));
        let out = self.refine.forward(&stacked)?;
        Ok(derealify(out.data()))
    }

    /// Batch form over stacked real vectors `[batch, 128]`; used in
    /// training where inputs and targets are already real.
    pub fn forward_real(&self, stacked: &Tensor) -> Result<Tensor> {
        self.refine.forward(stacked)
    }

    pub fn param_count(&self) -> usize {
        self.refine.param_count()
    }
}

impl Parameterized for CeSubnet {
    fn param_names(&self) -> Vec<String> {
        vec!["refine.weight".into()]
    }

    fn params(&self) -> Vec<&Tensor> {
        vec![&self.refine.weights]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.refine.weights]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{build_lmmse_weights, lmmse_estimate};
    use crate::channel::ChannelModel;
    use crate::ofdm::default_pilot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect()
    }

    #[test]
    fn untrained_subnet_equals_lmmse_estimator() {
        let model = ChannelModel::default_scenario();
        let weights =
            build_lmmse_weights(&model.frequency_correlation(64), 10.0, &default_pilot(64))
                .unwrap();
        let ce = CeSubnet::from_lmmse(&weights);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let h_ls = random_vec(&mut rng, 64);
            let via_net = ce.forward(&h_ls).unwrap();
            let via_lmmse = lmmse_estimate(&weights, &h_ls).unwrap();
            for (a, b) in via_net.iter().zip(&via_lmmse) {
                assert!((a - b).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn identity_weights_pass_the_estimate_through() {
        let ce = CeSubnet::identity(CE_DIM);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h = random_vec(&mut rng, 64);
        let out = ce.forward(&h).unwrap();
        for (a, b) in out.iter().zip(&h) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn refiner_is_real_linear() {
        let model = ChannelModel::default_scenario();
        let weights =
            build_lmmse_weights(&model.frequency_correlation(64), 15.0, &default_pilot(64))
                .unwrap();
        let ce = CeSubnet::from_lmmse(&weights);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u = random_vec(&mut rng, 64);
        let v = random_vec(&mut rng, 64);
        let (a, b) = (0.7, -1.3);
        let mixed: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = ce.forward(&mixed).unwrap();
        let fu = ce.forward(&u).unwrap();
        let fv = ce.forward(&v).unwrap();
        for k in 0..64 {
            let rhs = a * fu[k] + b * fv[k];
            assert!((lhs[k] - rhs).norm() < 1e-9);
        }
    }
}
