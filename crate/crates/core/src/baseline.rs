//! Conventional receiver algorithms: LS and LMMSE channel estimation,
//! ZF and MMSE symbol detection, and the genie bound that divides by the
//! true channel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cplx::{db_to_linear, derealify, noise_variance, realify};
use crate::error::{Error, Result};

/// Channel magnitude below which ZF declares the subcarrier unusable,
/// outputs 0 and flags it.
pub const ZF_ZERO_THRESHOLD: f64 = 1e-12;

/// Per-subcarrier least-squares channel estimate `y_P(k) / x_P(k)`.
pub fn ls_estimate(y_pilot: &[Complex64], x_pilot: &[Complex64]) -> Result<Vec<Complex64>> {
    if y_pilot.len() != x_pilot.len() {
        return Err(Error::dimension(
            "ls_estimate",
            "pilot",
            x_pilot.len(),
            y_pilot.len(),
        ));
    }
    if x_pilot.iter().any(|x| x.norm_sqr() == 0.0) {
        return Err(Error::Input(
            "pilot symbol contains a zero entry; LS estimate undefined".into(),
        ));
    }
    Ok(y_pilot.iter().zip(x_pilot).map(|(y, x)| y / x).collect())
}

/// LMMSE channel-estimation weights, kept both as the complex matrix `W`
/// and as the real block matrix
/// `[[Re W, -Im W], [Im W, Re W]]`
/// acting on stacked real/imaginary vectors. The real form is what
/// initializes the channel-estimation subnet.
#[derive(Clone, Debug)]
pub struct LmmseWeights {
    pub complex_matrix: DMatrix<Complex64>,
    /// Row-major `[2n, 2n]`.
    pub real_matrix: Vec<f64>,
    pub dim: usize,
    pub snr_design_db: f64,
}

/// `beta = E[|x|^2] * E[1/|x|^2]` over the actual pilot entries (1 for
/// unit-modulus pilots).
pub fn pilot_beta(pilot: &[Complex64]) -> f64 {
    let n = pilot.len() as f64;
    let p = pilot.iter().map(|x| x.norm_sqr()).sum::<f64>() / n;
    let ip = pilot.iter().map(|x| 1.0 / x.norm_sqr()).sum::<f64>() / n;
    p * ip
}

/// Builds `W = R (R + (beta/SNR) I)^-1` and its real block form.
pub fn build_lmmse_weights(
    r_hh: &DMatrix<Complex64>,
    snr_db: f64,
    pilot: &[Complex64],
) -> Result<LmmseWeights> {
    let n = r_hh.nrows();
    if r_hh.ncols() != n {
        return Err(Error::dimension("build_lmmse_weights", "columns", n, r_hh.ncols()));
    }
    let beta = pilot_beta(pilot);
    let eps = beta / db_to_linear(snr_db);
    let mut a = r_hh.clone();
    for k in 0..n {
        a[(k, k)] += Complex64::new(eps, 0.0);
    }
    let a_inv = a.try_inverse().ok_or_else(|| {
        Error::Numerical("LMMSE regularized correlation matrix is singular".into())
    })?;
    let w = r_hh * a_inv;

    let mut real_matrix = vec![0.0; (2 * n) * (2 * n)];
    let stride = 2 * n;
    for i in 0..n {
        for j in 0..n {
            let re = w[(i, j)].re;
            let im = w[(i, j)].im;
            real_matrix[i * stride + j] = re;
            real_matrix[i * stride + (n + j)] = -im;
            real_matrix[(n + i) * stride + j] = im;
            real_matrix[(n + i) * stride + (n + j)] = re;
        }
    }
    Ok(LmmseWeights {
        complex_matrix: w,
        real_matrix,
        dim: n,
        snr_design_db: snr_db,
    })
}

impl LmmseWeights {
    /// Applies the real block matrix to a stacked `[Re; Im]` vector.
    pub fn apply_real(&self, stacked: &[f64]) -> Vec<f64> {
        let d = 2 * self.dim;
        debug_assert_eq!(stacked.len(), d);
        let mut out = vec![0.0; d];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.real_matrix[r * d..(r + 1) * d];
            *o = row.iter().zip(stacked).map(|(w, x)| w * x).sum();
        }
        out
    }

    /// Applies the complex matrix directly (the dual route to
    /// [`LmmseWeights::apply_real`]).
    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = DVector::from_column_slice(v);
        let y = &self.complex_matrix * x;
        y.iter().copied().collect()
    }
}

/// LMMSE channel estimate: the real block matrix applied to the stacked LS
/// estimate, then unstacked.
pub fn lmmse_estimate(weights: &LmmseWeights, h_ls: &[Complex64]) -> Result<Vec<Complex64>> {
    if h_ls.len() != weights.dim {
        return Err(Error::dimension(
            "lmmse_estimate",
            "subcarriers",
            weights.dim,
            h_ls.len(),
        ));
    }
    Ok(derealify(&weights.apply_real(&realify(h_ls))))
}

/// Zero-forcing detection output. Subcarriers whose channel estimate
/// magnitude falls below [`ZF_ZERO_THRESHOLD`] produce 0 and are flagged.
#[derive(Clone, Debug)]
pub struct ZfDetection {
    pub symbols: Vec<Complex64>,
    pub flagged: Vec<bool>,
}

/// `x(k) = y_D(k) / h_hat(k)` with the near-zero-channel convention above.
pub fn zf_detect(y_data: &[Complex64], h_hat: &[Complex64]) -> ZfDetection {
    debug_assert_eq!(y_data.len(), h_hat.len());
    let mut symbols = Vec::with_capacity(y_data.len());
    let mut flagged = vec![false; y_data.len()];
    for (k, (y, h)) in y_data.iter().zip(h_hat).enumerate() {
        if h.norm() < ZF_ZERO_THRESHOLD {
            symbols.push(Complex64::new(0.0, 0.0));
            flagged[k] = true;
        } else {
            symbols.push(y / h);
        }
    }
    ZfDetection { symbols, flagged }
}

/// `x(k) = conj(h(k)) y(k) / (|h(k)|^2 + sigma^2)` with
/// `sigma^2 = 10^(-snr_db/10)`. Degrades gracefully at `h = 0`.
pub fn mmse_detect(y_data: &[Complex64], h_hat: &[Complex64], snr_db: f64) -> Vec<Complex64> {
    debug_assert_eq!(y_data.len(), h_hat.len());
    let sigma2 = noise_variance(snr_db);
    y_data
        .iter()
        .zip(h_hat)
        .map(|(y, h)| {
            let denom = h.norm_sqr() + sigma2;
            if denom == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                h.conj() * y / denom
            }
        })
        .collect()
}

/// The ideal bound: divides by the true channel (simulation only).
pub fn genie_detect(y_data: &[Complex64], h_true: &[Complex64]) -> Vec<Complex64> {
    zf_detect(y_data, h_true).symbols
}
