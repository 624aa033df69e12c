//! Time-interleaved equivalent of the error-feedback modulator.
//!
//! The high-rate recursion is re-expressed as M parallel paths clocked M
//! times slower. The loop filter's polyphase components are arranged into a
//! pseudo-circulant M×M block filter that routes each path's quantization
//! error to the paths that need it; entries that wrap around the matrix pick
//! up one low-rate delay. Evaluating the paths in ascending order inside each
//! low-rate step resolves every same-step dependency, so the interleaved
//! output reproduces the classical output bit-exactly, M samples later (the
//! serial-to-parallel / parallel-to-serial pipeline latency).

use crate::error::{Error, Result};
use crate::fir::{FirFilter, RateTag};
use crate::modulator::{ef_modulate, make_loop_filter, BitStream, QuantizerSpec};

/// Polyphase components H_0 … H_{M−1} of a filter: H(z) = Σ_k z⁻ᵏ H_k(z^M).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyphaseSet {
    components: Vec<FirFilter>,
    m: usize,
}

impl PolyphaseSet {
    pub fn components(&self) -> &[FirFilter] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &FirFilter {
        &self.components[k]
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Interleave the component taps back into the original filter.
    pub fn recompose(&self) -> FirFilter {
        let len = self
            .components
            .iter()
            .map(|c| c.coeffs().len())
            .max()
            .unwrap_or(1)
            * self.m;
        let mut coeffs = vec![0.0; len.max(1)];
        for (k, comp) in self.components.iter().enumerate() {
            for (t, &c) in comp.coeffs().iter().enumerate() {
                coeffs[k + t * self.m] = c;
            }
        }
        FirFilter::new(coeffs, RateTag::High)
    }
}

/// Split a filter into M polyphase components by tap striding: component k
/// takes taps c_k, c_{k+M}, c_{k+2M}, …
pub fn polyphase_decompose(h: &FirFilter, m: usize) -> Result<PolyphaseSet> {
    if m < 1 {
        return Err(Error::InvalidArgument(format!(
            "polyphase path count must be >= 1, got {m}"
        )));
    }
    let components = (0..m)
        .map(|k| {
            let taps: Vec<f64> = h.coeffs().iter().skip(k).step_by(m).copied().collect();
            if taps.is_empty() {
                FirFilter::zero(RateTag::Low)
            } else {
                FirFilter::new(taps, RateTag::Low)
            }
        })
        .collect();
    Ok(PolyphaseSet { components, m })
}

/// M×M pseudo-circulant block filter interconnecting the TI paths.
///
/// `entry(i, j)` is the transfer from path i's quantization error to path j's
/// quantizer input: entry(i, j) = H_{(j−i) mod M}(z), times z⁻¹ when j < i
/// (the wrap crosses a block boundary, so it reaches one low-rate step back).
/// The undelayed part of column j therefore only references rows i < j, plus
/// the always-zero leading tap of the diagonal — each low-rate step can be
/// evaluated path by path in ascending order.
///
/// The wrapped entries keep the sign of the polyphase component they carry;
/// this is the construction the bit-exact interleaved/classical equivalence
/// check locks in.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFilter {
    /// Row-major M×M: entries[i][j] routes e_i into u_j.
    entries: Vec<Vec<FirFilter>>,
    m: usize,
}

impl BlockFilter {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &FirFilter {
        &self.entries[i][j]
    }

    /// Mutable entry access; exists so audits can inject a deliberate
    /// corruption and verify the equivalence check localizes it.
    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut FirFilter {
        &mut self.entries[i][j]
    }
}

/// Build the pseudo-circulant block filter for loop filter `h` and M paths.
pub fn build_block_filter(h: &FirFilter, m: usize) -> Result<BlockFilter> {
    let poly = polyphase_decompose(h, m)?;
    let entries = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let comp = poly.component((j + m - i) % m);
                    if j < i {
                        comp.delayed(1)
                    } else {
                        comp.clone()
                    }
                })
                .collect()
        })
        .collect();
    Ok(BlockFilter { entries, m })
}

/// Bank of M low-rate ±1 streams, one per TI path.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRateBank {
    streams: Vec<BitStream>,
    m: usize,
}

impl LowRateBank {
    /// Wrap M equal-length streams.
    pub fn new(streams: Vec<BitStream>) -> Result<Self> {
        if streams.is_empty() {
            return Err(Error::InvalidArgument("bank needs at least one stream".into()));
        }
        let lens: Vec<usize> = streams.iter().map(|s| s.len()).collect();
        if lens.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::RaggedBank(lens));
        }
        let m = streams.len();
        Ok(Self { streams, m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn streams(&self) -> &[BitStream] {
        &self.streams
    }

    pub fn stream(&self, p: usize) -> &BitStream {
        &self.streams[p]
    }

    /// Symbols per stream.
    pub fn len(&self) -> usize {
        self.streams[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams[0].is_empty()
    }
}

/// Result of a TI modulation run.
#[derive(Debug, Clone)]
pub struct TiOutput {
    pub bank: LowRateBank,
    /// Zeros appended to make the input length a multiple of M.
    pub padding: usize,
    pub overload_count: usize,
}

/// Run the TI modulator: demultiplex the input into M phases, evaluate the
/// block-filter recursion one low-rate step at a time, quantize per path.
///
/// Each stream starts with one pipeline-fill symbol (the quantizer's zero
/// symbol, +1), so the multiplexed output is the classical output delayed by
/// exactly M samples.
pub fn ti_modulate(x: &[f64], m: usize, h: &FirFilter, q: &QuantizerSpec) -> Result<TiOutput> {
    let bf = build_block_filter(h, m)?;
    ti_modulate_with_filter(x, &bf, q)
}

/// Same as [`ti_modulate`] but with a caller-supplied block filter (used by
/// equivalence audits to inject corrupted entries).
pub fn ti_modulate_with_filter(
    x: &[f64],
    bf: &BlockFilter,
    q: &QuantizerSpec,
) -> Result<TiOutput> {
    let m = bf.m();
    let padding = (m - x.len() % m) % m;
    let steps = (x.len() + padding) / m;
    let fill = q.quantize(0.0)?;

    let mut outputs: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let mut v = Vec::with_capacity(steps + 1);
            v.push(fill);
            v
        })
        .collect();
    // Full low-rate error history per path; entry t is e_path(t).
    let mut errs: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); m];
    let mut overload_count = 0usize;

    for step in 0..steps {
        for j in 0..m {
            let xn = x.get(step * m + j).copied().unwrap_or(0.0);
            if xn.abs() > 1.0 {
                overload_count += 1;
            }
            let mut u = xn;
            for i in 0..m {
                // wrapped entries already carry their block-boundary z^-1 in
                // the stored taps, so the tap index is the low-rate lag
                let entry = bf.entry(i, j);
                for (lag, &c) in entry.coeffs().iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    if lag > step {
                        continue; // zero prehistory
                    }
                    // lag == 0 only reaches rows i < j, already produced
                    // earlier in this step. A corrupted filter (audit hook)
                    // may point at an error that does not exist yet; that
                    // reads as 0 rather than panicking.
                    if let Some(&e) = errs[i].get(step - lag) {
                        u += c * e;
                    }
                }
            }
            let y = q.quantize(u).map_err(|_| Error::NumericState {
                index: step * m + j,
                value: u,
            })?;
            outputs[j].push(y);
            errs[j].push(y - u);
        }
    }

    let streams = outputs.into_iter().map(BitStream::from_symbols).collect();
    Ok(TiOutput {
        bank: LowRateBank::new(streams)?,
        padding,
        overload_count,
    })
}

/// Interleave a bank back into one high-rate stream: y(n) = y_{n mod M}(⌊n/M⌋).
pub fn ti_multiplex_digital(bank: &LowRateBank) -> BitStream {
    let m = bank.m();
    let steps = bank.len();
    let mut out = Vec::with_capacity(m * steps);
    for step in 0..steps {
        for p in 0..m {
            out.push(bank.stream(p)[step]);
        }
    }
    BitStream::from_symbols(out)
}

/// Split a high-rate stream into M phase streams (inverse of the multiplexer).
pub fn ti_demultiplex(y: &BitStream, m: usize) -> Result<LowRateBank> {
    if m < 1 {
        return Err(Error::InvalidArgument(format!(
            "path count must be >= 1, got {m}"
        )));
    }
    if y.len() % m != 0 {
        return Err(Error::InvalidArgument(format!(
            "stream length {} is not a multiple of {m}",
            y.len()
        )));
    }
    let streams = (0..m)
        .map(|p| BitStream::from_symbols(y.iter().skip(p).step_by(m).copied().collect()))
        .collect();
    LowRateBank::new(streams)
}

/// Outcome of comparing the TI chain against the classical modulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// Residual at the best alignment; 0 means bit-exact.
    pub max_abs_diff: f64,
    /// Delay (in high-rate samples) of the TI output relative to the
    /// classical output at the best alignment.
    pub aligned_delay: usize,
}

impl EquivalenceReport {
    /// The TI chain reproduces the classical output exactly, M samples later.
    pub fn passes(&self, m: usize) -> bool {
        self.max_abs_diff == 0.0 && self.aligned_delay == m
    }
}

/// Modulate `x` both ways, then find the integer delay that best aligns the
/// TI multiplexed output with the classical output and report the residual.
pub fn equivalence_check(x: &[f64], m: usize, order: usize) -> Result<EquivalenceReport> {
    let h = make_loop_filter(order)?;
    let q = QuantizerSpec::default();
    let classical = ef_modulate(x, &h, &q)?;
    let ti = ti_modulate(x, m, &h, &q)?;
    let muxed = ti_multiplex_digital(&ti.bank);

    let reference = classical.bits.as_slice();
    let candidate = muxed.as_slice();
    let mut best = EquivalenceReport {
        max_abs_diff: f64::INFINITY,
        aligned_delay: 0,
    };
    for delay in 0..=(2 * m) {
        let overlap = reference.len().min(candidate.len().saturating_sub(delay));
        if overlap < reference.len() / 2 {
            continue;
        }
        let residual = (0..overlap)
            .map(|n| (candidate[n + delay] - reference[n]).abs())
            .fold(0.0f64, f64::max);
        if residual < best.max_abs_diff {
            best = EquivalenceReport {
                max_abs_diff: residual,
                aligned_delay: delay,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn second_order() -> FirFilter {
        make_loop_filter(2).unwrap()
    }

    #[test]
    fn decompose_strides_taps() {
        let h = FirFilter::new(vec![0.0, -2.0, 1.0, 0.0], RateTag::High);
        let p = polyphase_decompose(&h, 4).unwrap();
        assert_eq!(p.component(0).coeffs(), &[0.0]);
        assert_eq!(p.component(1).coeffs(), &[-2.0]);
        assert_eq!(p.component(2).coeffs(), &[1.0]);
        assert_eq!(p.component(3).coeffs(), &[0.0]);
    }

    #[test]
    fn decompose_m1_is_identity() {
        let h = FirFilter::new(vec![1.0, 2.0, 3.0], RateTag::High);
        let p = polyphase_decompose(&h, 1).unwrap();
        assert_eq!(p.component(0).coeffs(), h.coeffs());
    }

    #[test]
    fn decompose_recomposes_exactly() {
        let h = FirFilter::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], RateTag::High);
        let p = polyphase_decompose(&h, 2).unwrap();
        assert_eq!(p.component(0).coeffs(), &[1.0, 3.0, 5.0]);
        assert_eq!(p.component(1).coeffs(), &[2.0, 4.0, 6.0]);
        assert_eq!(p.recompose().coeffs(), h.coeffs());
    }

    #[test]
    fn decompose_rejects_zero_paths() {
        let h = second_order();
        assert!(polyphase_decompose(&h, 0).is_err());
    }

    #[test]
    fn block_filter_matches_second_order_m4() {
        // For H = -2z^-1 + z^-2, M = 4 the rows (error source i, consumer j):
        //   row 0: ( 0     -2      1      0 )
        //   row 1: ( 0      0     -2      1 )
        //   row 2: ( z^-1   0      0     -2 )
        //   row 3: (-2z^-1  z^-1   0      0 )
        let bf = build_block_filter(&second_order(), 4).unwrap();
        let expect = |i: usize, j: usize, taps: &[f64]| {
            assert_eq!(bf.entry(i, j).coeffs(), taps, "entry ({i},{j})");
        };
        expect(0, 0, &[0.0]);
        expect(0, 1, &[-2.0]);
        expect(0, 2, &[1.0]);
        expect(0, 3, &[0.0]);
        expect(1, 0, &[0.0]);
        expect(1, 1, &[0.0]);
        expect(1, 2, &[-2.0]);
        expect(1, 3, &[1.0]);
        expect(2, 0, &[0.0, 1.0]);
        expect(2, 1, &[0.0]);
        expect(2, 2, &[0.0]);
        expect(2, 3, &[-2.0]);
        expect(3, 0, &[0.0, -2.0]);
        expect(3, 1, &[0.0, 1.0]);
        expect(3, 2, &[0.0]);
        expect(3, 3, &[0.0]);
    }

    #[test]
    fn block_filter_m1_is_the_filter_itself() {
        let h = second_order();
        let bf = build_block_filter(&h, 1).unwrap();
        assert_eq!(bf.entry(0, 0).coeffs(), h.coeffs());
    }

    #[test]
    fn block_filter_is_pseudo_circulant() {
        let h = FirFilter::new(vec![0.0, -2.0, 1.0, 0.5, -0.25], RateTag::High);
        for m in [2usize, 3, 4, 8] {
            let bf = build_block_filter(&h, m).unwrap();
            let poly = polyphase_decompose(&h, m).unwrap();
            for i in 0..m {
                for j in 0..m {
                    let base = poly.component((j + m - i) % m);
                    let expected = if j < i { base.delayed(1) } else { base.clone() };
                    assert_eq!(bf.entry(i, j), &expected, "entry ({i},{j}) m={m}");
                    // shifting both indices by one preserves the entry modulo
                    // the wrap delay
                    let (i2, j2) = ((i + 1) % m, (j + 1) % m);
                    let a = bf.entry(i, j);
                    let b = bf.entry(i2, j2);
                    let wrapped = |r: usize, c: usize| c < r;
                    match (wrapped(i, j), wrapped(i2, j2)) {
                        (false, true) => assert_eq!(&a.delayed(1), b),
                        (true, false) => assert_eq!(a, &b.delayed(1)),
                        _ => assert_eq!(a, b),
                    }
                }
            }
        }
    }

    #[test]
    fn in_block_dependencies_are_causal() {
        // The undelayed part of column j may reference only rows i < j.
        for m in [2usize, 4, 8] {
            let bf = build_block_filter(&second_order(), m).unwrap();
            for j in 0..m {
                for i in j..m {
                    if i == j {
                        assert_eq!(bf.entry(i, j).tap(0), 0.0);
                    } else {
                        assert!(
                            bf.entry(i, j).is_strictly_causal(),
                            "entry ({i},{j}) must carry a wrap delay"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn multiplex_interleaves() {
        let bank = LowRateBank::new(vec![
            BitStream::from_symbols(vec![1.0, -1.0]),
            BitStream::from_symbols(vec![-1.0, 1.0]),
        ])
        .unwrap();
        let y = ti_multiplex_digital(&bank);
        assert_eq!(y.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn multiplex_m1_is_identity() {
        let bank = LowRateBank::new(vec![BitStream::from_symbols(vec![1.0, -1.0, 1.0])]).unwrap();
        assert_eq!(ti_multiplex_digital(&bank).as_slice(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn demultiplex_inverts_multiplex() {
        let mut rng = StdRng::seed_from_u64(5);
        let streams: Vec<BitStream> = (0..4)
            .map(|_| {
                BitStream::from_symbols(
                    (0..64)
                        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                        .collect(),
                )
            })
            .collect();
        let bank = LowRateBank::new(streams).unwrap();
        let muxed = ti_multiplex_digital(&bank);
        assert_eq!(ti_demultiplex(&muxed, 4).unwrap(), bank);
    }

    #[test]
    fn ragged_bank_is_rejected() {
        let r = LowRateBank::new(vec![
            BitStream::from_symbols(vec![1.0, -1.0]),
            BitStream::from_symbols(vec![1.0]),
        ]);
        assert!(matches!(r, Err(Error::RaggedBank(_))));
    }

    #[test]
    fn ti_equals_classical_delayed_m() {
        let mut rng = StdRng::seed_from_u64(11);
        let x: Vec<f64> = (0..4096).map(|_| rng.gen_range(-0.9..0.9)).collect();
        for m in [1usize, 2, 4] {
            for order in [1usize, 2] {
                let report = equivalence_check(&x, m, order).unwrap();
                assert!(
                    report.passes(m),
                    "m={m} order={order}: {:?}",
                    report
                );
            }
        }
    }

    #[test]
    fn ti_idle_pattern_is_shifted_classical_idle() {
        let h = second_order();
        let q = QuantizerSpec::default();
        let x = vec![0.0; 64];
        let ti = ti_modulate(&x, 4, &h, &q).unwrap();
        let muxed = ti_multiplex_digital(&ti.bank);
        let classical = ef_modulate(&x, &h, &q).unwrap();
        for p in 0..4 {
            assert!(ti.bank.stream(p).iter().all(|&s| s == 1.0 || s == -1.0));
        }
        assert_eq!(&muxed[4..4 + 64], classical.bits.as_slice());
    }

    #[test]
    fn ti_pads_and_records_non_multiple_lengths() {
        let h = second_order();
        let q = QuantizerSpec::default();
        let x = vec![0.3; 10];
        let ti = ti_modulate(&x, 4, &h, &q).unwrap();
        assert_eq!(ti.padding, 2);
        assert_eq!(ti.bank.len(), 4); // 3 input blocks + pipeline fill
    }

    #[test]
    fn corrupted_entry_breaks_equivalence() {
        let h = second_order();
        let q = QuantizerSpec::default();
        let mut rng = StdRng::seed_from_u64(3);
        let x: Vec<f64> = (0..512).map(|_| rng.gen_range(-0.9..0.9)).collect();
        let mut bf = build_block_filter(&h, 4).unwrap();
        *bf.entry_mut(2, 3) = FirFilter::new(vec![0.0, 1.0], RateTag::Low);
        let ti = ti_modulate_with_filter(&x, &bf, &q).unwrap();
        let muxed = ti_multiplex_digital(&ti.bank);
        let classical = ef_modulate(&x, &h, &q).unwrap();
        let mismatch = (0..512).any(|n| muxed[n + 4] != classical.bits[n]);
        assert!(mismatch, "corruption must surface as a mismatch");
    }
}
