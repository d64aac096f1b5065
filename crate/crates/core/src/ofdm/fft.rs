//! Unitary FFT helpers (1/sqrt(N) scaling in both directions) plus the raw
//! unnormalized DFT used for channel frequency responses.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn run(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(&mut buf);
    });
    buf
}

/// Forward DFT with 1/sqrt(N) scaling.
pub fn fft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    let mut out = run(x, false);
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// Inverse DFT with 1/sqrt(N) scaling.
pub fn ifft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    let mut out = run(x, true);
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// Unnormalized forward DFT: `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
pub fn dft_unnormalized(x: &[Complex64]) -> Vec<Complex64> {
    run(x, false)
}
