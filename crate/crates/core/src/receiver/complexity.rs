//! Parameter, FLOP and memory accounting for every receiver, for one
//! forward pass over a single OFDM data symbol.
//!
//! Conventions (also emitted with the report):
//! - matrix products count 2 FLOPs per multiply-add;
//! - bias adds and activation evaluations count 1 FLOP per element;
//! - an LSTM step additionally spends 13 FLOPs per hidden unit on the
//!   gate nonlinearities and state updates;
//! - complex divide = 9 FLOPs, complex multiply-accumulate = 8;
//! - hard demapping scans all 64 candidate points at 5 FLOPs each;
//! - the LMMSE weight build is charged a Cholesky solve,
//!   (4/3) n^3 complex MACs, since it must be recomputed per channel
//!   state;
//! - memory is 4 bytes per stored parameter (32-bit deployment storage);
//!   receivers without stored weights report zero.

use super::ce::CE_DIM;
use super::fcdnn::{FcDnnReceiver, HIDDEN_LAYERS, INPUT_DIM};
use super::sd_bilstm::{HEAD_INPUT, HIDDEN_SIZES, STEP_FEATURES};
use super::sd_fc::{BITS_PER_GROUP, GROUPS, HIDDEN};
use super::{ComnetReceiver, SdSubnet};

pub const FLOPS_COMPLEX_DIV: u64 = 9;
pub const FLOPS_COMPLEX_MAC: u64 = 8;
const SUBCARRIERS: u64 = 64;
const FRAME_BITS: u64 = 384;

/// Dense layer with bias and a unit-cost activation.
fn dense_flops(out: u64, inp: u64) -> u64 {
    2 * out * inp + 2 * out
}

/// One LSTM cell step.
fn lstm_step_flops(hidden: u64, input: u64) -> u64 {
    2 * 4 * hidden * (input + hidden) + 4 * hidden + 13 * hidden
}

fn bilstm_group_flops() -> u64 {
    let mut per_step_one_direction = 0;
    let mut input = STEP_FEATURES as u64;
    for &h in &HIDDEN_SIZES {
        per_step_one_direction += lstm_step_flops(h as u64, input);
        input = 2 * h as u64;
    }
    2 * SUBCARRIERS * per_step_one_direction
        + dense_flops(BITS_PER_GROUP as u64, HEAD_INPUT as u64)
}

fn demap_flops() -> u64 {
    SUBCARRIERS * 64 * 5
}

fn ls_flops() -> u64 {
    SUBCARRIERS * FLOPS_COMPLEX_DIV
}

fn zf_flops() -> u64 {
    SUBCARRIERS * FLOPS_COMPLEX_DIV
}

fn ce_subnet_flops() -> u64 {
    2 * (CE_DIM as u64) * (CE_DIM as u64)
}

fn decide_flops() -> u64 {
    FRAME_BITS
}

pub fn count_params_comnet(rx: &ComnetReceiver) -> usize {
    rx.ce.param_count()
        + match &rx.sd {
            SdSubnet::Fc(sd) => sd.param_count(),
            SdSubnet::BiLstm(sd) => sd.param_count(),
        }
}

pub fn count_flops_comnet(rx: &ComnetReceiver) -> u64 {
    let sd = match &rx.sd {
        SdSubnet::Fc(net) => {
            let inp = net.input_dim() as u64;
            GROUPS as u64
                * (dense_flops(HIDDEN as u64, inp)
                    + dense_flops(BITS_PER_GROUP as u64, HIDDEN as u64))
        }
        SdSubnet::BiLstm(_) => GROUPS as u64 * bilstm_group_flops(),
    };
    ls_flops() + ce_subnet_flops() + zf_flops() + sd + decide_flops()
}

pub fn count_params_fcdnn(rx: &FcDnnReceiver) -> usize {
    rx.param_count()
}

pub fn count_flops_fcdnn(_rx: &FcDnnReceiver) -> u64 {
    let mut per_net = 0;
    let mut input = INPUT_DIM as u64;
    for &h in &HIDDEN_LAYERS {
        per_net += dense_flops(h as u64, input);
        input = h as u64;
    }
    per_net += dense_flops(BITS_PER_GROUP as u64, input);
    GROUPS as u64 * per_net + decide_flops()
}

/// LS estimation, LMMSE weight build + apply, MMSE detection, demap.
pub fn count_flops_lmmse_mmse() -> u64 {
    let n = SUBCARRIERS;
    let weight_build = 4 * n * n * n / 3 * FLOPS_COMPLEX_MAC;
    let apply = 2 * (2 * n) * (2 * n);
    let mmse_detect = n * 12;
    ls_flops() + weight_build + apply + mmse_detect + demap_flops()
}

pub fn count_flops_ls_zf() -> u64 {
    ls_flops() + zf_flops() + demap_flops()
}

pub fn count_flops_genie() -> u64 {
    zf_flops() + demap_flops()
}

/// 4 bytes per parameter.
pub fn memory_bytes(params: usize) -> u64 {
    4 * params as u64
}

/// One row of the complexity report.
#[derive(Clone, Debug)]
pub struct ComplexityRow {
    pub receiver: String,
    pub params: usize,
    pub flops: u64,
    pub memory_bytes: u64,
    /// FLOPs per byte; absent for receivers without stored weights.
    pub intensity: Option<f64>,
}

impl ComplexityRow {
    pub fn new(receiver: &str, params: usize, flops: u64) -> Self {
        let bytes = memory_bytes(params);
        ComplexityRow {
            receiver: receiver.to_string(),
            params,
            flops,
            memory_bytes: bytes,
            intensity: (bytes > 0).then(|| flops as f64 / bytes as f64),
        }
    }
}

/// Rows for every receiver the harness knows about.
pub fn full_report(fc_extended_features: bool) -> Vec<ComplexityRow> {
    let comnet_fc = ComnetReceiver::untrained_fc(10.0, fc_extended_features);
    let comnet_bilstm = ComnetReceiver::untrained_bilstm(10.0);
    let fcdnn = FcDnnReceiver::zeros();
    vec![
        ComplexityRow::new(
            "comnet_bilstm",
            count_params_comnet(&comnet_bilstm),
            count_flops_comnet(&comnet_bilstm),
        ),
        ComplexityRow::new(
            "comnet_fc",
            count_params_comnet(&comnet_fc),
            count_flops_comnet(&comnet_fc),
        ),
        ComplexityRow::new("fcdnn", count_params_fcdnn(&fcdnn), count_flops_fcdnn(&fcdnn)),
        ComplexityRow::new("lmmse_mmse", 0, count_flops_lmmse_mmse()),
        ComplexityRow::new("ls_zf", 0, count_flops_ls_zf()),
        ComplexityRow::new("genie", 0, count_flops_genie()),
    ]
}
