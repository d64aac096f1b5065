//! Tapped-delay-line Rayleigh fading channel with an exponential power-delay
//! profile, additive noise, and the true frequency response used as channel
//! estimation ground truth.
//!
//! One realization covers one frame (block fading): pilot and data symbols
//! share the same taps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cplx::noise_variance;
use crate::error::{Error, Result};
use crate::ofdm::{dft_unnormalized, fft_unitary, CpMode, OfdmConfig};

/// Tap count and exponential decay of the default scenario.
pub const DEFAULT_NUM_TAPS: usize = 16;
pub const DEFAULT_DECAY: f64 = 4.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Per-tap average power; non-negative, sums to 1.
    power_delay_profile: Vec<f64>,
}

impl ChannelModel {
    /// Exponential profile `p[l] ~ exp(-l / decay)` over `num_taps` taps,
    /// normalized to unit total power.
    pub fn exponential(num_taps: usize, decay: f64) -> Self {
        assert!(num_taps >= 1 && decay > 0.0);
        let raw: Vec<f64> = (0..num_taps).map(|l| (-(l as f64) / decay).exp()).collect();
        let total: f64 = raw.iter().sum();
        ChannelModel {
            power_delay_profile: raw.into_iter().map(|p| p / total).collect(),
        }
    }

    pub fn default_scenario() -> Self {
        Self::exponential(DEFAULT_NUM_TAPS, DEFAULT_DECAY)
    }

    pub fn num_taps(&self) -> usize {
        self.power_delay_profile.len()
    }

    pub fn power_delay_profile(&self) -> &[f64] {
        &self.power_delay_profile
    }

    /// Analytic frequency-domain correlation `R[i][j] = E[h(i) conj(h(j))]
    /// = sum_l p[l] exp(-2 pi i l (i - j) / n)`. Hermitian with unit
    /// diagonal.
    pub fn frequency_correlation(&self, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &p) in self.power_delay_profile.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (l as f64) * (i as f64 - j as f64)
                    / n as f64;
                acc += p * Complex64::from_polar(1.0, phase);
            }
            acc
        })
    }
}

/// One block-fading draw: taps plus the matching frequency response
/// `h(k) = sum_l c_l exp(-2 pi i k l / n)`, so that `y(k) = h(k) x(k)`
/// holds exactly in the with-CP linear case.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    pub freq_response: Vec<Complex64>,
}

/// Draws i.i.d. complex Gaussian taps with variances from the PDP.
pub fn draw_channel<R: Rng>(
    model: &ChannelModel,
    num_subcarriers: usize,
    rng: &mut R,
) -> ChannelRealization {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let taps: Vec<Complex64> = model
        .power_delay_profile
        .iter()
        .map(|&p| {
            let s = (p / 2.0).sqrt();
            Complex64::new(s * normal.sample(rng), s * normal.sample(rng))
        })
        .collect();
    let mut padded = taps.clone();
    padded.resize(num_subcarriers, Complex64::new(0.0, 0.0));
    let freq_response = dft_unnormalized(&padded);
    ChannelRealization {
        taps,
        freq_response,
    }
}

/// Frequency-domain pilot and data observations after the channel.
///
/// The transmitted two-symbol stream is linearly convolved with the taps
/// and complex Gaussian noise of variance `10^(-snr_db/10)` per sample is
/// added. The receiver strips the CP (with CP) or takes consecutive
/// 64-sample windows (no CP) and applies the unitary FFT. With the CP
/// omitted, the data symbol suffers ISI from the pilot tail and the pilot
/// from the silence preceding the frame.
pub fn apply_channel<R: Rng>(
    tx_time: &[Complex64],
    realization: &ChannelRealization,
    config: &OfdmConfig,
    snr_db: f64,
    rng: &mut R,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = config.num_subcarriers;
    if tx_time.len() != config.frame_len() {
        return Err(Error::Input(format!(
            "tx stream length {} does not match the config frame length {}",
            tx_time.len(),
            config.frame_len()
        )));
    }
    if config.cp_mode == CpMode::WithCp && realization.taps.len() > config.cp_length {
        return Err(Error::Input(format!(
            "channel has {} taps but the cyclic prefix holds only {}",
            realization.taps.len(),
            config.cp_length
        )));
    }
    if realization.freq_response.len() != n {
        return Err(Error::Input(format!(
            "realization has {} frequency bins, config expects {n}",
            realization.freq_response.len()
        )));
    }

    // Linear convolution over the received extent we will window.
    let len = tx_time.len();
    let mut rx = vec![Complex64::new(0.0, 0.0); len];
    for (l, &c) in realization.taps.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for m in l..len {
            rx[m] += c * tx_time[m - l];
        }
    }

    let sigma2 = noise_variance(snr_db);
    if sigma2 > 0.0 {
        let normal = Normal::new(0.0, (sigma2 / 2.0).sqrt()).unwrap();
        for v in &mut rx {
            *v += Complex64::new(normal.sample(rng), normal.sample(rng));
        }
    }

    let (pilot_start, data_start) = match config.cp_mode {
        CpMode::WithCp => (config.cp_length, 2 * config.cp_length + n),
        CpMode::NoCp => (0, n),
    };
    let y_pilot = fft_unitary(&rx[pilot_start..pilot_start + n]);
    let y_data = fft_unitary(&rx[data_start..data_start + n]);
    Ok((y_pilot, y_data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::{random_frame, Scenario};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_tap_channel_is_frequency_flat() {
        let model = ChannelModel::exponential(1, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let real = draw_channel(&model, 64, &mut rng);
        let m0 = real.freq_response[0].norm();
        for h in &real.freq_response {
            assert!((h.norm() - m0).abs() < 1e-12);
        }
    }

    #[test]
    fn tap_energy_is_normalized() {
        let model = ChannelModel::default_scenario();
        assert!((model.power_delay_profile().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let real = draw_channel(&model, 64, &mut rng);
            acc += real.taps.iter().map(|t| t.norm_sqr()).sum::<f64>();
        }
        let mean = acc / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean tap energy {mean}");
    }

    #[test]
    fn per_subcarrier_energy_is_unity() {
        let model = ChannelModel::default_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let mut acc = vec![0.0; 64];
        for _ in 0..draws {
            let real = draw_channel(&model, 64, &mut rng);
            for (a, h) in acc.iter_mut().zip(&real.freq_response) {
                *a += h.norm_sqr();
            }
        }
        for (k, a) in acc.iter().enumerate() {
            let mean = a / draws as f64;
            assert!((mean - 1.0).abs() < 0.03, "subcarrier {k}: {mean}");
        }
    }

    #[test]
    fn with_cp_noiseless_equals_per_subcarrier_multiplication() {
        let cfg = OfdmConfig::for_scenario(Scenario::Linear);
        let model = ChannelModel::default_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let frame = random_frame(&cfg, &mut rng).unwrap();
            let real = draw_channel(&model, 64, &mut rng);
            let (y_p, y_d) =
                apply_channel(&frame.tx_time, &real, &cfg, f64::INFINITY, &mut rng).unwrap();
            for k in 0..64 {
                let ep = real.freq_response[k] * frame.x_pilot[k];
                let ed = real.freq_response[k] * frame.x_data[k];
                assert!((y_p[k] - ep).norm() < 1e-9);
                assert!((y_d[k] - ed).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn no_cp_single_tap_has_no_isi() {
        let cfg = OfdmConfig::for_scenario(Scenario::CpRemoval);
        let model = ChannelModel::exponential(1, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame = random_frame(&cfg, &mut rng).unwrap();
        let real = draw_channel(&model, 64, &mut rng);
        let (y_p, y_d) =
            apply_channel(&frame.tx_time, &real, &cfg, f64::INFINITY, &mut rng).unwrap();
        for k in 0..64 {
            assert!((y_p[k] - real.freq_response[k] * frame.x_pilot[k]).norm() < 1e-9);
            assert!((y_d[k] - real.freq_response[k] * frame.x_data[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn no_cp_multipath_leaves_isi_residual() {
        let cfg = OfdmConfig::for_scenario(Scenario::CpRemoval);
        let model = ChannelModel::default_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let frame = random_frame(&cfg, &mut rng).unwrap();
        let real = draw_channel(&model, 64, &mut rng);
        let (_, y_d) =
            apply_channel(&frame.tx_time, &real, &cfg, f64::INFINITY, &mut rng).unwrap();
        let residual: f64 = (0..64)
            .map(|k| (y_d[k] - real.freq_response[k] * frame.x_data[k]).norm_sqr())
            .sum();
        assert!(residual > 1e-6, "expected an ISI residual, got {residual}");
    }

    #[test]
    fn correlation_diagonal_is_one_and_flat_channel_is_all_ones() {
        let model = ChannelModel::default_scenario();
        let r = model.frequency_correlation(64);
        for k in 0..64 {
            assert!((r[(k, k)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let flat = ChannelModel::exponential(1, 1.0).frequency_correlation(8);
        for i in 0..8 {
            for j in 0..8 {
                assert!((flat[(i, j)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn empirical_covariance_matches_analytic_correlation() {
        let model = ChannelModel::exponential(4, 2.0);
        let n = 16;
        let r = model.frequency_correlation(n);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for _ in 0..draws {
            let real = draw_channel(&model, n, &mut rng);
            for i in 0..n {
                for j in 0..n {
                    acc[(i, j)] += real.freq_response[i] * real.freq_response[j].conj();
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let emp = acc[(i, j)] / draws as f64;
                assert!(
                    (emp - r[(i, j)]).norm() < 0.02,
                    "entry ({i},{j}): {emp} vs {}",
                    r[(i, j)]
                );
            }
        }
    }

    #[test]
    fn hermitian_psd_via_real_embedding_eigenvalues() {
        let model = ChannelModel::default_scenario();
        let r = model.frequency_correlation(64);
        // Hermitian check.
        for i in 0..64 {
            for j in 0..64 {
                assert!((r[(i, j)] - r[(j, i)].conj()).norm() < 1e-12);
            }
        }
        // Real symmetric embedding [[Re, -Im], [Im, Re]] has the same
        // eigenvalues (doubled in multiplicity).
        let m = DMatrix::<f64>::from_fn(128, 128, |i, j| {
            let (bi, ii) = (i / 64, i % 64);
            let (bj, jj) = (j / 64, j % 64);
            match (bi, bj) {
                (0, 0) | (1, 1) => r[(ii, jj)].re,
                (0, 1) => -r[(ii, jj)].im,
                (1, 0) => r[(ii, jj)].im,
                _ => unreachable!(),
            }
        });
        let eig = m.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "min eigenvalue {min}");
    }

    #[test]
    fn measured_snr_tracks_requested_snr() {
        let cfg = OfdmConfig::for_scenario(Scenario::Linear);
        let model = ChannelModel::default_scenario();
        let snr_db = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut sig = 0.0;
        let mut noise = 0.0;
        for _ in 0..10_000 {
            let frame = random_frame(&cfg, &mut rng).unwrap();
            let real = draw_channel(&model, 64, &mut rng);
            let (cp, cd) =
                apply_channel(&frame.tx_time, &real, &cfg, f64::INFINITY, &mut rng).unwrap();
            let (np, nd) = apply_channel(&frame.tx_time, &real, &cfg, snr_db, &mut rng).unwrap();
            for k in 0..64 {
                sig += cp[k].norm_sqr() + cd[k].norm_sqr();
                noise += (np[k] - cp[k]).norm_sqr() + (nd[k] - cd[k]).norm_sqr();
            }
        }
        let measured = 10.0 * (sig / noise).log10();
        assert!(
            (measured - snr_db).abs() < 0.1,
            "measured {measured:.3} dB vs requested {snr_db} dB"
        );
    }

    #[test]
    fn mismatched_stream_length_is_an_input_error() {
        let cfg = OfdmConfig::for_scenario(Scenario::Linear);
        let model = ChannelModel::default_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let real = draw_channel(&model, 64, &mut rng);
        let bad = vec![Complex64::new(0.0, 0.0); 10];
        assert!(apply_channel(&bad, &real, &cfg, 10.0, &mut rng).is_err());
    }
}
