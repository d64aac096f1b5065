//! Adam optimizer with bias correction.

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// First/second moment estimates for an ordered parameter list.
#[derive(Clone, Debug)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// State for parameters of the given lengths, with the standard
    /// defaults beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(param_lens: &[usize]) -> Self {
        AdamState {
            first_moment: param_lens.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: param_lens.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn for_params(params: &[&Tensor]) -> Self {
        let lens: Vec<usize> = params.iter().map(|p| p.len()).collect();
        Self::new(&lens)
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One Adam update over an ordered parameter list and matching
    /// gradients. Moments are always updated, including when
    /// `learning_rate` is zero.
    pub fn step(
        &mut self,
        params: &mut [&mut Tensor],
        grads: &[Vec<f64>],
        learning_rate: f64,
    ) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != self.first_moment.len() {
            return Err(Error::dimension(
                "adam_step",
                "params",
                self.first_moment.len(),
                params.len().max(grads.len()),
            ));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (k, param) in params.iter_mut().enumerate() {
            let g = &grads[k];
            if g.len() != param.len() {
                return Err(Error::dimension(
                    "adam_step",
                    "grad",
                    param.len(),
                    g.len(),
                ));
            }
            let m = &mut self.first_moment[k];
            let v = &mut self.second_moment[k];
            let data = param.data_mut();
            for i in 0..data.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                data[i] -= learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut p = Tensor::from_vec(vec![1.0, -2.0]);
        let mut state = AdamState::new(&[2]);
        state
            .step(&mut [&mut p], &[vec![0.0, 0.0]], 0.01)
            .unwrap();
        assert_eq!(p.data(), &[1.0, -2.0]);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn constant_gradient_matches_hand_stepped_trace() {
        // Scalar parameter, g = 0.5 for three steps, lr = 0.1. The oracle
        // below re-derives the update from the raw recurrences.
        let g = 0.5;
        let lr = 0.1;
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut x = 1.0f64;
        let (mut m, mut v) = (0.0f64, 0.0f64);
        let mut expected = Vec::new();
        for t in 1..=3 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            x -= lr * mh / (vh.sqrt() + eps);
            expected.push(x);
        }

        let mut p = Tensor::from_vec(vec![1.0]);
        let mut state = AdamState::new(&[1]);
        for want in expected {
            state.step(&mut [&mut p], &[vec![g]], lr).unwrap();
            assert!((p.data()[0] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_learning_rate_still_updates_moments() {
        let mut p = Tensor::from_vec(vec![3.0]);
        let mut state = AdamState::new(&[1]);
        state.step(&mut [&mut p], &[vec![1.0]], 0.0).unwrap();
        assert_eq!(p.data(), &[3.0]);
        assert!(state.first_moment[0][0] > 0.0);
        assert!(state.second_moment[0][0] > 0.0);
    }
}
