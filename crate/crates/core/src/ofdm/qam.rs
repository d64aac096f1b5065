//! LTE-standard 64-QAM mapping and hard demapping.
//!
//! Labels are six bits `b0..b5` in transmission order (`b0` most
//! significant). The in-phase level is set by `(b0, b2, b4)` and the
//! quadrature level by `(b1, b3, b5)`, with levels in `{±1, ±3, ±5, ±7}`
//! scaled by `1/sqrt(42)` for unit average energy. The labeling is
//! Gray-adjacent along each axis.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const BITS_PER_SYMBOL: usize = 6;
pub const ORDER: usize = 64;

#[derive(Clone, Debug)]
pub struct QamConstellation {
    /// Point for each 6-bit label, indexed by the label value.
    points: Vec<Complex64>,
}

/// Amplitude level selected by a sign bit and two magnitude bits, before
/// the `1/sqrt(42)` scaling.
fn level(sign: u8, m1: u8, m2: u8) -> f64 {
    let s = 1.0 - 2.0 * sign as f64;
    let a = 1.0 - 2.0 * m1 as f64;
    let b = 1.0 - 2.0 * m2 as f64;
    s * (4.0 - a * (2.0 - b))
}

impl QamConstellation {
    pub fn lte64() -> Self {
        let scale = 1.0 / 42f64.sqrt();
        let points = (0..ORDER)
            .map(|label| {
                let b: Vec<u8> = (0..6).map(|k| ((label >> (5 - k)) & 1) as u8).collect();
                let i = level(b[0], b[2], b[4]);
                let q = level(b[1], b[3], b[5]);
                Complex64::new(i * scale, q * scale)
            })
            .collect();
        QamConstellation { points }
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Maps bits (multiple of 6) to symbols.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if bits.len() % BITS_PER_SYMBOL != 0 {
            return Err(Error::Input(format!(
                "bit count {} is not divisible by {BITS_PER_SYMBOL}",
                bits.len()
            )));
        }
        Ok(bits
            .chunks_exact(BITS_PER_SYMBOL)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[label]
            })
            .collect())
    }

    /// Minimum-Euclidean-distance decision per symbol. Ties break toward
    /// the lower label interpreted as an unsigned integer.
    pub fn demap_hard(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(symbols.len() * BITS_PER_SYMBOL);
        for s in symbols {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (label, p) in self.points.iter().enumerate() {
                let d = (s - p).norm_sqr();
                if d < best_d {
                    best_d = d;
                    best = label;
                }
            }
            for k in 0..BITS_PER_SYMBOL {
                bits.push(((best >> (5 - k)) & 1) as u8);
            }
        }
        bits
    }
}
