//! End-to-end OFDM link simulation with model-driven neural receivers.
//!
//! The crate provides a conventional baseband chain (64-subcarrier OFDM,
//! LTE 64-QAM, tapped-delay-line Rayleigh fading), classical LS/LMMSE
//! channel estimation and ZF/MMSE detection, and small refinement networks
//! that start from those classical solutions: a linear channel-estimation
//! refiner plus fully connected or bidirectional-LSTM detection subnets.
//! A training pipeline and an evaluation harness reproduce BER/MSE sweeps
//! and complexity reports at desk scale.

pub mod baseline;
pub mod channel;
pub mod cplx;
pub mod error;
pub mod nn;
pub mod ofdm;
pub mod receiver;

pub use error::{Error, Result};
