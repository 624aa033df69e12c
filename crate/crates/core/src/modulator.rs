//! Error-feedback sigma-delta modulator clocked at the high rate.
//!
//! The quantization error e(n) = y(n) − u(n) is filtered by the strictly
//! causal loop filter H(z) and added back to the input, so the output is
//! y(n) = x(n) + (1 + H)(z)·e(n): the input passes straight through while the
//! error is shaped by the high-pass noise transfer function 1 + H(z).

use crate::error::{Error, Result};
use crate::fir::{FirFilter, RateTag};

/// A ±1 symbol sequence (single-bit DAC input).
#[derive(Debug, Clone, PartialEq)]
pub struct BitStream(Vec<f64>);

impl BitStream {
    /// Wrap a symbol vector. Debug builds verify every symbol is ±1.
    pub fn from_symbols(symbols: Vec<f64>) -> Self {
        debug_assert!(
            symbols.iter().all(|&s| s == 1.0 || s == -1.0),
            "bit stream symbols must be exactly +1 or -1"
        );
        Self(symbols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for BitStream {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Single-bit quantizer with symmetric output levels ±v_s.
///
/// The tie at exactly 0 maps to +v_s so runs are deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub v_s: f64,
}

impl Default for QuantizerSpec {
    fn default() -> Self {
        Self { v_s: 1.0 }
    }
}

impl QuantizerSpec {
    /// Quantize one value: +v_s for v ≥ 0, −v_s otherwise.
    ///
    /// A non-finite input reports modulator divergence instead of silently
    /// producing a symbol.
    pub fn quantize(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::NumericState { index: 0, value: v });
        }
        Ok(if v >= 0.0 { self.v_s } else { -self.v_s })
    }
}

/// Loop filter H(z) = (1 − z⁻¹)^L − 1 for a modulator of order `L`.
///
/// c_0 is always zero (the error feedback is strictly causal). Orders above 2
/// would need a stabilizing denominator polynomial and are rejected.
pub fn make_loop_filter(order: usize) -> Result<FirFilter> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    // Binomial expansion of (1 - z^-1)^L, then drop the constant 1.
    let mut coeffs = vec![0.0; order + 1];
    let mut binom = 1.0f64;
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c = binom * if k % 2 == 0 { 1.0 } else { -1.0 };
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    coeffs[0] -= 1.0;
    Ok(FirFilter::new(coeffs, RateTag::High))
}

/// Noise transfer function 1 + H(z).
pub fn ntf_of(h: &FirFilter) -> FirFilter {
    let mut coeffs = h.coeffs().to_vec();
    coeffs[0] += 1.0;
    FirFilter::new(coeffs, h.rate())
}

/// Stateful error-feedback modulator: loop filter, quantizer, and the ring of
/// the last L quantization errors.
#[derive(Debug, Clone)]
pub struct ErrorFeedbackModulator {
    filter: FirFilter,
    quantizer: QuantizerSpec,
    /// e(n−1), e(n−2), … e(n−L) as a ring buffer.
    history: Vec<f64>,
    pos: usize,
    sample_index: usize,
}

impl ErrorFeedbackModulator {
    pub fn new(filter: FirFilter, quantizer: QuantizerSpec) -> Self {
        let depth = filter.order().max(1);
        Self {
            filter,
            quantizer,
            history: vec![0.0; depth],
            pos: 0,
            sample_index: 0,
        }
    }

    /// Process one input sample; returns (y(n), e(n)).
    pub fn step(&mut self, x: f64) -> Result<(f64, f64)> {
        let depth = self.history.len();
        let mut u = x;
        for k in 1..=self.filter.order() {
            // e(n-k) sits k slots behind the write position.
            let idx = (self.pos + depth - k) % depth;
            u += self.filter.tap(k) * self.history[idx];
        }
        let y = self.quantizer.quantize(u).map_err(|_| Error::NumericState {
            index: self.sample_index,
            value: u,
        })?;
        let e = y - u;
        self.history[self.pos] = e;
        self.pos = (self.pos + 1) % depth;
        self.sample_index += 1;
        Ok((y, e))
    }

    pub fn reset(&mut self) {
        self.history.fill(0.0);
        self.pos = 0;
        self.sample_index = 0;
    }
}

/// One modulation run: the bit stream, the recorded quantization errors, and
/// how many input samples exceeded full scale.
#[derive(Debug, Clone)]
pub struct EfOutput {
    pub bits: BitStream,
    pub errors: Vec<f64>,
    /// Samples with |x| > 1. Overload is logged, not fatal: dynamic-range
    /// sweeps probe near full scale on purpose.
    pub overload_count: usize,
}

/// Run the error-feedback modulator over a whole input with zero initial state.
pub fn ef_modulate(x: &[f64], h: &FirFilter, q: &QuantizerSpec) -> Result<EfOutput> {
    let mut modulator = ErrorFeedbackModulator::new(h.clone(), *q);
    let mut bits = Vec::with_capacity(x.len());
    let mut errors = Vec::with_capacity(x.len());
    let mut overload_count = 0usize;
    for &xn in x {
        if xn.abs() > 1.0 {
            overload_count += 1;
        }
        let (y, e) = modulator.step(xn)?;
        bits.push(y);
        errors.push(e);
    }
    Ok(EfOutput {
        bits: BitStream::from_symbols(bits),
        errors,
        overload_count,
    })
}
