//! Model-driven receiver assembly: LS estimate refined by the CE subnet,
//! ZF detection refined by an FC or BiLSTM subnet, and the bit decision,
//! plus the data-driven FC-DNN baseline receiver.

pub mod ce;
pub mod complexity;
pub mod fcdnn;
pub mod sd_bilstm;
pub mod sd_fc;

use num_complex::Complex64;

use crate::baseline::{build_lmmse_weights, ls_estimate, zf_detect};
use crate::channel::ChannelModel;
use crate::error::Result;
use crate::ofdm::{default_pilot, QamConstellation};

pub use ce::CeSubnet;
pub use fcdnn::FcDnnReceiver;
pub use sd_bilstm::BiLstmSdSubnet;
pub use sd_fc::FcSdSubnet;

#[derive(Clone, Debug)]
pub enum SdSubnet {
    Fc(FcSdSubnet),
    BiLstm(BiLstmSdSubnet),
}

impl SdSubnet {
    pub fn forward(
        &self,
        x_zf: &[Complex64],
        h_hat: &[Complex64],
        y_data: &[Complex64],
    ) -> Result<Vec<f64>> {
        match self {
            SdSubnet::Fc(net) => net.forward(x_zf, h_hat, y_data),
            SdSubnet::BiLstm(net) => net.forward(x_zf, h_hat, y_data),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SdSubnet::Fc(_) => "fc",
            SdSubnet::BiLstm(_) => "bilstm",
        }
    }
}

/// Two cascaded subnets behind the conventional LS and ZF solutions.
#[derive(Clone, Debug)]
pub struct ComnetReceiver {
    pub ce: CeSubnet,
    pub sd: SdSubnet,
    pub constellation: QamConstellation,
}

/// Intermediate quantities of one receive pass, including the short-path
/// bits obtained by hard-demapping the ZF symbols directly.
#[derive(Clone, Debug)]
pub struct ReceiveDiagnostics {
    pub h_hat: Vec<Complex64>,
    pub x_zf: Vec<Complex64>,
    pub zf_flagged: Vec<bool>,
    pub soft_bits: Vec<f64>,
    pub short_path_bits: Vec<u8>,
}

/// Hard decision: 1 where the soft bit exceeds 0.5, otherwise 0 (a value
/// of exactly 0.5 decides 0).
pub fn decide_bits(soft_bits: &[f64]) -> Vec<u8> {
    soft_bits.iter().map(|&s| u8::from(s > 0.5)).collect()
}

impl ComnetReceiver {
    pub fn new(ce: CeSubnet, sd: SdSubnet) -> Self {
        ComnetReceiver {
            ce,
            sd,
            constellation: QamConstellation::lte64(),
        }
    }

    /// LMMSE-initialized CE (for the default channel model at the given
    /// design SNR) with a zero-weight FC detection subnet.
    pub fn untrained_fc(snr_design_db: f64, extended_features: bool) -> Self {
        let r = ChannelModel::default_scenario().frequency_correlation(64);
        let weights = build_lmmse_weights(&r, snr_design_db, &default_pilot(64))
            .expect("default LMMSE weights");
        Self::new(
            CeSubnet::from_lmmse(&weights),
            SdSubnet::Fc(FcSdSubnet::zeros(extended_features)),
        )
    }

    /// LMMSE-initialized CE with a zero-weight BiLSTM detection subnet.
    pub fn untrained_bilstm(snr_design_db: f64) -> Self {
        let r = ChannelModel::default_scenario().frequency_correlation(64);
        let weights = build_lmmse_weights(&r, snr_design_db, &default_pilot(64))
            .expect("default LMMSE weights");
        Self::new(
            CeSubnet::from_lmmse(&weights),
            SdSubnet::BiLstm(BiLstmSdSubnet::zeros()),
        )
    }

    /// Full receive pipeline:
    /// LS estimate -> CE refinement -> ZF -> SD refinement -> bit decision.
    pub fn receive(
        &self,
        y_pilot: &[Complex64],
        y_data: &[Complex64],
        x_pilot: &[Complex64],
    ) -> Result<(Vec<u8>, Vec<Complex64>, ReceiveDiagnostics)> {
        let h_ls = ls_estimate(y_pilot, x_pilot)?;
        let h_hat = self.ce.forward(&h_ls)?;
        let det = zf_detect(y_data, &h_hat);
        let soft_bits = self.sd.forward(&det.symbols, &h_hat, y_data)?;
        let bits = decide_bits(&soft_bits);
        let short_path_bits = self.constellation.demap_hard(&det.symbols);
        let diagnostics = ReceiveDiagnostics {
            h_hat: h_hat.clone(),
            x_zf: det.symbols,
            zf_flagged: det.flagged,
            soft_bits,
            short_path_bits,
        };
        Ok((bits, h_hat, diagnostics))
    }
}

impl FcDnnReceiver {
    /// Receive pass of the data-driven baseline: soft bits straight from
    /// the observations.
    pub fn receive(&self, y_pilot: &[Complex64], y_data: &[Complex64]) -> Result<Vec<u8>> {
        Ok(decide_bits(&self.forward(y_pilot, y_data)?))
    }
}
