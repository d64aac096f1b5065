//! Complex-vector helpers: the real/imaginary "stacking" used to feed
//! complex frequency-domain signals into real-valued networks, plus a few
//! small numeric utilities.

use num_complex::Complex64;

/// Stacks a complex vector into `[Re(v) ; Im(v)]` (length `2n`).
pub fn realify(v: &[Complex64]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; 2 * n];
    for (k, z) in v.iter().enumerate() {
        out[k] = z.re;
        out[n + k] = z.im;
    }
    out
}

/// Inverse of [`realify`]: the first half is the real part, the second half
/// the imaginary part. Panics if the length is odd.
pub fn derealify(v: &[f64]) -> Vec<Complex64> {
    assert!(v.len() % 2 == 0, "derealify needs an even-length vector");
    let n = v.len() / 2;
    (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect()
}

/// Mean of `|v[k]|^2`.
pub fn mean_power(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// `sum |a[k] - b[k]|^2 / n`, the per-entry squared error between two
/// equal-length complex vectors.
pub fn mean_sq_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / a.len() as f64
}

/// Linear SNR from a dB value; `-inf` maps to 0 and `+inf` to infinity.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Noise variance per frequency-domain symbol for a requested SNR, under
/// unit average transmit symbol energy.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
