//! Central finite-difference gradient verification.
//!
//! The checker compares analytic gradients (whatever the caller's backward
//! path produced) against `(L(p + h) - L(p - h)) / 2h` computed purely from
//! repeated forward passes, so the two routes stay independent.

use super::params::{Gradients, Parameterized};

/// Default perturbation step.
pub const FD_STEP: f64 = 1e-5;
/// Default acceptance threshold on the relative error.
pub const FD_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub checks: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

/// Relative error with the floor used throughout the gradient suite.
pub fn relative_error(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8)
}

/// Checks every element of every parameter of `net`.
///
/// `analytic` must hold the gradients of `loss(net)` w.r.t. the parameters
/// in traversal order; `loss` is re-evaluated with perturbed parameters to
/// form the central difference.
pub fn check_gradients<N, F>(
    net: &mut N,
    analytic: &Gradients,
    mut loss: F,
    step: f64,
) -> GradCheckReport
where
    N: Parameterized,
    F: FnMut(&N) -> f64,
{
    let names = net.param_names();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        checks: 0,
    };
    for k in 0..names.len() {
        let len = net.params()[k].len();
        for i in 0..len {
            let original = net.params()[k].data()[i];
            net.params_mut()[k].data_mut()[i] = original + step;
            let plus = loss(net);
            net.params_mut()[k].data_mut()[i] = original - step;
            let minus = loss(net);
            net.params_mut()[k].data_mut()[i] = original;

            let fd = (plus - minus) / (2.0 * step);
            let rel = relative_error(analytic.slots[k][i], fd);
            report.checks += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst_param = names[k].clone();
                report.worst_index = i;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::dense::{Activation, DenseLayer, Mlp};
    use crate::nn::loss::{mse_grad, mse_loss};
    use crate::nn::params::Gradients;
    use crate::nn::tensor::Tensor;

    #[test]
    fn detects_a_corrupted_gradient() {
        let mut layer = DenseLayer::zeros(1, 1, false, Activation::None);
        layer.weights.data_mut()[0] = 0.7;
        let mut net = Mlp::new(vec![layer]);
        let x = Tensor::from_vec(vec![1.3]);
        let y = Tensor::from_vec(vec![0.2]);

        let (out, cache) = net.forward_cached(&x).unwrap();
        let mut grads = Gradients::zeros_for(&net);
        net.backward(&cache, &mse_grad(&out, &y).unwrap(), &mut grads.slots)
            .unwrap();

        let loss = |n: &Mlp| mse_loss(&n.forward(&x).unwrap(), &y).unwrap();
        let ok = check_gradients(&mut net, &grads, loss, FD_STEP);
        assert!(ok.passes(FD_TOLERANCE), "rel err {}", ok.max_rel_error);

        grads.slots[0][0] += 0.5;
        let bad = check_gradients(&mut net, &grads, loss, FD_STEP);
        assert!(!bad.passes(FD_TOLERANCE));
        assert_eq!(bad.worst_param, "layer0.weight");
    }
}
