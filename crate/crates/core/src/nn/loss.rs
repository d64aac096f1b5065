//! Mean-squared-error loss.

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Mean over all elements of the squared difference.
pub fn mse_loss(prediction: &Tensor, target: &Tensor) -> Result<f64> {
    if prediction.shape() != target.shape() {
        return Err(Error::dimension(
            "mse_loss",
            "target",
            prediction.len(),
            target.len(),
        ));
    }
    let n = prediction.len() as f64;
    let sum: f64 = prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / n)
}

/// Gradient of [`mse_loss`] w.r.t. the prediction: `2 (p - t) / n`.
pub fn mse_grad(prediction: &Tensor, target: &Tensor) -> Result<Tensor> {
    if prediction.shape() != target.shape() {
        return Err(Error::dimension(
            "mse_grad",
            "target",
            prediction.len(),
            target.len(),
        ));
    }
    let n = prediction.len() as f64;
    let data = prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect();
    Tensor::new(prediction.shape().to_vec(), data)
}
