//! Averaged-periodogram power spectral density estimation.
//!
//! Hann-windowed segments with 50% overlap, one-sided density normalized so
//! that Σ psd·Δf equals the signal's mean power (Parseval).

use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdConfig {
    /// Samples per segment (also the FFT length).
    pub segment_len: usize,
    /// Fraction of overlap between adjacent segments.
    pub overlap: f64,
    /// Sample rate of the input in units of f_H (1 for high-rate digital
    /// streams, K for rendered waveforms).
    pub sample_rate: f64,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self {
            segment_len: 1 << 14,
            overlap: 0.5,
            sample_rate: 1.0,
        }
    }
}

/// One-sided PSD estimate. Frequencies are in units of f_H.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub freqs: Vec<f64>,
    /// Linear density, power per unit f_H.
    pub psd: Vec<f64>,
    /// 10·log10 of the linear density.
    pub psd_db: Vec<f64>,
    /// Bin width in units of f_H.
    pub bin_width: f64,
    pub segments: usize,
    pub window: &'static str,
}

impl SpectrumEstimate {
    /// Σ psd·Δf — total power, for Parseval checks.
    pub fn integrated_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width
    }

    /// Density at the bin nearest `f` (units of f_H).
    pub fn density_at(&self, f: f64) -> f64 {
        let idx = ((f / self.bin_width).round() as usize).min(self.psd.len() - 1);
        self.psd[idx]
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Estimate the one-sided PSD of `samples` by Welch's method.
///
/// Requires enough input for at least 4 segments at the configured overlap.
pub fn estimate_psd(samples: &[f64], cfg: &PsdConfig) -> Result<SpectrumEstimate> {
    let n = cfg.segment_len;
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "segment length must be >= 16, got {n}"
        )));
    }
    if !(0.0..0.95).contains(&cfg.overlap) {
        return Err(Error::InvalidArgument(format!(
            "overlap must be in [0, 0.95), got {}",
            cfg.overlap
        )));
    }
    let step = ((n as f64 * (1.0 - cfg.overlap)) as usize).max(1);
    let min_len = n + 3 * step;
    if samples.len() < min_len {
        return Err(Error::InputTooShort {
            len: samples.len(),
            min: min_len,
        });
    }

    let window = hann(n);
    let window_power: f64 = window.iter().map(|w| w * w).sum::<f64>() / n as f64;
    let fft = FftPlanner::new().plan_fft_forward(n);

    let half = n / 2;
    let mut acc = vec![0.0f64; half + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + n <= samples.len() {
        for (b, (&s, &w)) in buf.iter_mut().zip(samples[start..].iter().zip(&window)) {
            *b = Complex::new(s * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(buf.iter().take(half + 1)) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (cfg.sample_rate * window_power * n as f64 * segments as f64);
    let mut psd: Vec<f64> = acc.iter().map(|a| a * scale).collect();
    for p in psd.iter_mut().take(half).skip(1) {
        *p *= 2.0; // fold the negative frequencies, DC and Nyquist excepted
    }

    let bin_width = cfg.sample_rate / n as f64;
    let freqs: Vec<f64> = (0..=half).map(|b| b as f64 * bin_width).collect();
    let psd_db: Vec<f64> = psd.iter().map(|&p| 10.0 * p.max(1e-300).log10()).collect();
    Ok(SpectrumEstimate {
        freqs,
        psd,
        psd_db,
        bin_width,
        segments,
        window: "hann",
    })
}
