//! Transmitter chain and frame structure: bit generation, 64-QAM mapping,
//! IFFT/FFT, cyclic prefix handling, pilot insertion and clipping.

pub mod fft;
pub mod qam;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use fft::{dft_unnormalized, fft_unitary, ifft_unitary};
pub use qam::{QamConstellation, BITS_PER_SYMBOL};

pub const NUM_SUBCARRIERS: usize = 64;
pub const CP_LENGTH: usize = 16;
/// Bits carried by one data OFDM symbol (all subcarriers active).
pub const BITS_PER_FRAME: usize = NUM_SUBCARRIERS * BITS_PER_SYMBOL;

/// Seed of the fixed pseudo-random QPSK pilot sequence. All frames share
/// the same pilot.
const PILOT_SEED: u64 = 0x0fd_64_16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpMode {
    WithCp,
    NoCp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClippingConfig {
    /// CR = amplitude threshold / RMS of the unclipped time-domain signal.
    pub clipping_ratio: f64,
}

/// The three simulated impairment cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Linear,
    CpRemoval,
    Clipping,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Linear => "linear",
            Scenario::CpRemoval => "cp_removal",
            Scenario::Clipping => "clipping",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Scenario::Linear),
            "cp_removal" => Ok(Scenario::CpRemoval),
            "clipping" => Ok(Scenario::Clipping),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OfdmConfig {
    pub num_subcarriers: usize,
    pub cp_length: usize,
    pub cp_mode: CpMode,
    /// Known unit-modulus pilot symbol vector.
    pub pilot: Vec<Complex64>,
    pub clipping: Option<ClippingConfig>,
    /// When clipping is enabled, whether it also applies to the pilot
    /// symbol (default) or only to the data symbol.
    pub clip_pilot: bool,
    pub constellation: QamConstellation,
}

impl OfdmConfig {
    pub fn new(cp_mode: CpMode, clipping: Option<ClippingConfig>) -> Self {
        let cfg = OfdmConfig {
            num_subcarriers: NUM_SUBCARRIERS,
            cp_length: CP_LENGTH,
            cp_mode,
            pilot: default_pilot(NUM_SUBCARRIERS),
            clipping,
            clip_pilot: true,
            constellation: QamConstellation::lte64(),
        };
        debug_assert!(cfg.cp_length < cfg.num_subcarriers);
        debug_assert!(cfg.pilot.iter().all(|p| p.norm() > 0.0));
        cfg
    }

    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Linear => Self::new(CpMode::WithCp, None),
            Scenario::CpRemoval => Self::new(CpMode::NoCp, None),
            Scenario::Clipping => Self::new(
                CpMode::WithCp,
                Some(ClippingConfig {
                    clipping_ratio: 1.6,
                }),
            ),
        }
    }

    /// Time-domain length of one OFDM symbol as transmitted.
    pub fn symbol_len(&self) -> usize {
        match self.cp_mode {
            CpMode::WithCp => self.num_subcarriers + self.cp_length,
            CpMode::NoCp => self.num_subcarriers,
        }
    }

    /// Total time-domain length of a pilot + data frame.
    pub fn frame_len(&self) -> usize {
        2 * self.symbol_len()
    }
}

/// Fixed unit-modulus QPSK pilot sequence generated from [`PILOT_SEED`].
pub fn default_pilot(n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(PILOT_SEED);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re = if rng.gen::<bool>() { s } else { -s };
            let im = if rng.gen::<bool>() { s } else { -s };
            Complex64::new(re, im)
        })
        .collect()
}

/// One transmitted frame: a pilot OFDM symbol followed by a data symbol.
#[derive(Clone, Debug)]
pub struct OfdmFrame {
    pub bits: Vec<u8>,
    pub x_data: Vec<Complex64>,
    pub x_pilot: Vec<Complex64>,
    pub tx_time: Vec<Complex64>,
}

/// Unitary IFFT plus optional cyclic prefix.
pub fn ofdm_modulate(freq_symbols: &[Complex64], config: &OfdmConfig) -> Result<Vec<Complex64>> {
    if freq_symbols.len() != config.num_subcarriers {
        return Err(Error::dimension(
            "ofdm_modulate",
            "subcarriers",
            config.num_subcarriers,
            freq_symbols.len(),
        ));
    }
    let time = ifft_unitary(freq_symbols);
    Ok(match config.cp_mode {
        CpMode::NoCp => time,
        CpMode::WithCp => {
            let n = time.len();
            let mut out = Vec::with_capacity(n + config.cp_length);
            out.extend_from_slice(&time[n - config.cp_length..]);
            out.extend_from_slice(&time);
            out
        }
    })
}

/// Unitary FFT of one CP-free 64-sample window.
pub fn ofdm_demodulate(window: &[Complex64], config: &OfdmConfig) -> Result<Vec<Complex64>> {
    if window.len() != config.num_subcarriers {
        return Err(Error::dimension(
            "ofdm_demodulate",
            "window",
            config.num_subcarriers,
            window.len(),
        ));
    }
    Ok(fft_unitary(window))
}

/// Clipping threshold `A = CR * RMS(samples)` computed from the unclipped
/// signal.
pub fn clip_threshold(samples: &[Complex64], config: &ClippingConfig) -> f64 {
    let rms = (samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64).sqrt();
    config.clipping_ratio * rms
}

/// Magnitude clipping at a fixed threshold; phase is preserved.
pub fn clip_with_threshold(samples: &[Complex64], threshold: f64) -> Vec<Complex64> {
    samples
        .iter()
        .map(|s| {
            let m = s.norm();
            if m <= threshold || m == 0.0 {
                *s
            } else {
                s * (threshold / m)
            }
        })
        .collect()
}

/// Clips at `CR * RMS` of the input signal itself.
pub fn clip(samples: &[Complex64], config: &ClippingConfig) -> Vec<Complex64> {
    clip_with_threshold(samples, clip_threshold(samples, config))
}

/// Builds the pilot-then-data frame for 384 data bits. Clipping, when
/// configured, applies to each OFDM symbol's time-domain samples
/// independently.
pub fn build_frame(bits: &[u8], config: &OfdmConfig) -> Result<OfdmFrame> {
    let expected = config.num_subcarriers * BITS_PER_SYMBOL;
    if bits.len() != expected {
        return Err(Error::Input(format!(
            "frame needs {expected} bits, got {}",
            bits.len()
        )));
    }
    let x_data = config.constellation.map(bits)?;
    let x_pilot = config.pilot.clone();
    let mut pilot_time = ofdm_modulate(&x_pilot, config)?;
    let mut data_time = ofdm_modulate(&x_data, config)?;
    if let Some(clipping) = &config.clipping {
        if config.clip_pilot {
            pilot_time = clip(&pilot_time, clipping);
        }
        data_time = clip(&data_time, clipping);
    }
    let mut tx_time = pilot_time;
    tx_time.extend_from_slice(&data_time);
    Ok(OfdmFrame {
        bits: bits.to_vec(),
        x_data,
        x_pilot,
        tx_time,
    })
}

/// Uniform random bits.
pub fn random_bits<R: Rng>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Random-payload frame.
pub fn random_frame<R: Rng>(config: &OfdmConfig, rng: &mut R) -> Result<OfdmFrame> {
    let bits = random_bits(config.num_subcarriers * BITS_PER_SYMBOL, rng);
    build_frame(&bits, config)
}
