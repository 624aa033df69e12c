//! FIR transfer functions in powers of z⁻¹.

/// Clock domain a filter's z⁻¹ refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateTag {
    /// One delay = one high-rate period T_H.
    High,
    /// One delay = one low-rate period T_L = M·T_H.
    Low,
}

/// A finite impulse response transfer function Σ c_k z⁻ᵏ.
///
/// Trailing zero taps are trimmed on construction so equal transfer functions
/// compare equal; at least one tap is always kept.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    coeffs: Vec<f64>,
    rate: RateTag,
}

impl FirFilter {
    /// Build a filter from taps `c_0, c_1, …` (canonicalized).
    ///
    /// # Panics
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<f64>, rate: RateTag) -> Self {
        assert!(!coeffs.is_empty(), "FirFilter needs at least one tap");
        let mut f = Self { coeffs, rate };
        f.canonicalize();
        f
    }

    /// The all-zero transfer function (a single zero tap).
    pub fn zero(rate: RateTag) -> Self {
        Self {
            coeffs: vec![0.0],
            rate,
        }
    }

    fn canonicalize(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rate(&self) -> RateTag {
        self.rate
    }

    /// Tap value at delay `k`, zero beyond the stored taps.
    pub fn tap(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Highest stored delay.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True when c_0 = 0, i.e. the filter output never depends on the
    /// current-sample input.
    pub fn is_strictly_causal(&self) -> bool {
        self.coeffs[0] == 0.0
    }

    /// Multiply by z⁻ᵈ (prepend `d` zero taps).
    pub fn delayed(&self, d: usize) -> Self {
        let mut coeffs = vec![0.0; d];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs, self.rate)
    }

    /// Evaluate the transfer function at z = e^{j2πf} and return |H|.
    pub fn magnitude_at(&self, f: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * f * k as f64;
            re += c * phase.cos();
            im += c * phase.sin();
        }
        (re * re + im * im).sqrt()
    }

    /// Filter a sequence with zero prehistory: y[n] = Σ_k c_k x[n−k].
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for n in k..x.len() {
                y[n] += c * x[n - k];
            }
        }
        y
    }
}
