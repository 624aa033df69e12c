//! Figure-of-merit computation: SNDR, jitter SNR predictions, comb-filter
//! frequency response and the oversampling bounds it implies.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Minimum record length (in high-rate periods) for a trustworthy SNDR.
pub const MIN_SNDR_PERIODS: usize = 1 << 16;

/// In-band metric settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    /// Oversampling ratio; the signal band is B = f_H/(2·OSR).
    pub osr: usize,
    /// Tone frequency in units of f_H; snapped to the nearest FFT bin.
    pub fx: f64,
    /// Bins on each side of the tone counted as signal.
    pub guard_bins: usize,
}

impl MetricConfig {
    pub fn new(osr: usize, fx: f64) -> Self {
        Self {
            osr,
            fx,
            guard_bins: 3,
        }
    }

    /// Signal band edge B in units of f_H.
    pub fn band(&self) -> f64 {
        0.5 / self.osr as f64
    }
}

/// SNDR measurement with the bookkeeping needed to reproduce it.
#[derive(Debug, Clone, Copy)]
pub struct SndrResult {
    pub sndr_db: f64,
    /// FFT bin the tone was snapped to.
    pub signal_bin: usize,
    /// Actual tone frequency after snapping, units of f_H.
    pub fx_snapped: f64,
    /// Tone power (signal bins), normalized so a full-scale sine reads 0.5.
    pub signal_power: f64,
    /// Noise+distortion power integrated over (0, B] minus the signal bins.
    pub noise_power: f64,
    /// Set when the tone does not stand clear of the in-band noise floor.
    pub low_confidence: bool,
}

/// Compute SNDR over the band (0, B].
///
/// The record is transformed in one full-length FFT (this is the sharp
/// band-limiting step: only bins at or below B enter the metric, which also
/// keeps jitter-widened high-frequency content from aliasing into the
/// result). The tone is the `guard_bins`-neighborhood of the bin nearest
/// `cfg.fx`; everything else in (0, B] counts as noise+distortion. DC is
/// excluded.
///
/// `samples_per_period` is the number of grid samples per high-rate period
/// (1 for digital streams, K for rendered waveforms). The record must cover
/// at least [`MIN_SNDR_PERIODS`] periods.
pub fn compute_sndr(
    samples: &[f64],
    samples_per_period: usize,
    cfg: &MetricConfig,
) -> Result<SndrResult> {
    if samples_per_period < 1 {
        return Err(Error::InvalidArgument(
            "samples_per_period must be >= 1".into(),
        ));
    }
    let n_periods = samples.len() / samples_per_period;
    if n_periods < MIN_SNDR_PERIODS {
        return Err(Error::InputTooShort {
            len: n_periods,
            min: MIN_SNDR_PERIODS,
        });
    }
    let n = n_periods * samples_per_period;
    let samples = &samples[..n];

    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // bin b corresponds to frequency b / n_periods in units of f_H
    let signal_bin = (cfg.fx * n_periods as f64).round() as usize;
    let band_bin = (cfg.band() * n_periods as f64).floor() as usize;
    let guard = cfg.guard_bins;
    if signal_bin == 0 || signal_bin <= guard {
        return Err(Error::InvalidArgument(format!(
            "tone bin {signal_bin} collides with DC (guard {guard})"
        )));
    }
    if signal_bin + guard > band_bin {
        return Err(Error::InvalidArgument(format!(
            "tone bin {signal_bin} too close to the band edge bin {band_bin}"
        )));
    }

    // one-sided powers normalized so a sine of amplitude A reads A^2/2
    let norm = 2.0 / (n as f64 * n as f64);
    let bin_power = |b: usize| buf[b].norm_sqr() * norm;

    let mut signal_power = 0.0;
    for b in signal_bin - guard..=signal_bin + guard {
        signal_power += bin_power(b);
    }
    let mut noise_power = 0.0;
    for b in 1..=band_bin {
        if b < signal_bin - guard || b > signal_bin + guard {
            noise_power += bin_power(b);
        }
    }

    let noise_bins = band_bin - 2 * guard - 1;
    let noise_in_signal_width = noise_power / noise_bins.max(1) as f64 * (2 * guard + 1) as f64;
    let low_confidence = signal_power <= 2.0 * noise_in_signal_width;

    Ok(SndrResult {
        sndr_db: 10.0 * (signal_power / noise_power).log10(),
        signal_bin,
        fx_snapped: signal_bin as f64 / n_periods as f64,
        signal_power,
        noise_power,
        low_confidence,
    })
}

/// Population standard deviation of the first differences y(n) − y(n−1).
pub fn measure_sigma_dy(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let n = (y.len() - 1) as f64;
    let mean = y.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / n;
    let var = y
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0] - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    var.sqrt()
}

/// Closed-form SNR limit imposed by i.i.d. clock jitter on a single
/// high-rate DAC: 10·log10((A/(f_s·σ_τ·σ_δy))²·OSR).
///
/// `amplitude` is the RMS amplitude of the converted tone (peak/√2 for a
/// sine). Quoting the formula with the peak amplitude overstates the ratio
/// by 3 dB relative to what a simulation measures. Returns +∞ when σ_τ or
/// σ_δy is zero (no jitter noise to bound).
pub fn predict_snr_jtt1(
    amplitude: f64,
    f_s: f64,
    sigma_tau: f64,
    sigma_dy: f64,
    osr: usize,
) -> f64 {
    if sigma_tau == 0.0 || sigma_dy == 0.0 {
        return f64::INFINITY;
    }
    let ratio = amplitude / (f_s * sigma_tau * sigma_dy);
    10.0 * (ratio * ratio * osr as f64).log10()
}

/// DAC step of the (M+1)-level comb-filtered signal: Δ_M = 2·V_S/M.
pub fn dac_step(m: usize, v_s: f64) -> f64 {
    assert!(m >= 1 && v_s > 0.0);
    2.0 * v_s / m as f64
}

/// Jitter SNR improvement of the M-path analog multiplexer: 20·log10(M) dB.
pub fn snr_improvement_db(m: usize) -> f64 {
    assert!(m >= 1);
    20.0 * (m as f64).log10()
}

/// Magnitude response of the order-M comb at normalized frequency `f`
/// (units of f_H, 0 ≤ f ≤ 0.5): |sin(πMf)/(M·sin(πf))|, with the f→0 limit 1
/// and exact zeros at multiples of 1/M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombResponse {
    pub magnitude: f64,
    pub magnitude_db: f64,
}

pub fn comb_response(m: usize, f: f64) -> CombResponse {
    assert!(m >= 1);
    assert!((0.0..=0.5).contains(&f), "frequency {f} outside [0, 0.5]");
    let magnitude = if (f - f.round()).abs() < 1e-12 {
        1.0 // DC (f = 0 within the allowed range)
    } else {
        let mf = m as f64 * f;
        if (mf - mf.round()).abs() < 1e-12 {
            0.0 // zero of the comb, exact by construction
        } else {
            ((PI * mf).sin() / (m as f64 * (PI * f).sin())).abs()
        }
    };
    CombResponse {
        magnitude,
        magnitude_db: 10.0 * (magnitude * magnitude).max(1e-300).log10(),
    }
}

/// Smallest OSR that keeps the comb's droop at the band edge B = f_H/(2·OSR)
/// within `max_droop_db`: solves |H_C(B)| = 10^(−droop/20) on the comb's main
/// lobe by bisection to 1e−6.
pub fn min_osr_for_distortion(m: usize, max_droop_db: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "comb droop needs at least 2 paths".into(),
        ));
    }
    if max_droop_db <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "droop must be positive, got {max_droop_db}"
        )));
    }
    let target = 10f64.powf(-max_droop_db / 20.0);
    // |H_C| falls monotonically from 1 to 0 across the main lobe (0, 1/M)
    let (mut lo, mut hi) = (0.0f64, 1.0 / m as f64);
    while hi - lo > 1e-6 / m as f64 {
        let mid = 0.5 * (lo + hi);
        if comb_response(m, mid).magnitude > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f_c = 0.5 * (lo + hi);
    Ok(0.5 / f_c)
}
