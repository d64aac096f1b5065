//! Minimal neural-network engine: tensors, dense layers, (Bi)LSTM cells,
//! MSE loss, reverse-mode gradients and the Adam optimizer.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod graph;
pub mod loss;
pub mod lstm;
pub mod params;
pub mod tensor;

pub use adam::AdamState;
pub use dense::{relu, sigmoid, Activation, DenseLayer, Mlp};
pub use graph::{adam_step_from_grad_slots, MlpGraph};
pub use loss::{mse_grad, mse_loss};
pub use lstm::{BiLstmLayer, BiLstmStack, LstmCell};
pub use params::{
    load_checkpoint, param_checksum, save_checkpoint, Gradients, NetworkParams, Parameterized,
};
pub use tensor::Tensor;
