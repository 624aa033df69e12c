//! Continuous-time output stage.
//!
//! DAC outputs are piecewise-constant voltages whose transition instants come
//! from a (possibly jittered) clock. Waveforms are kept as exact edge lists
//! and rasterized area-exactly onto a uniform grid of K cells per high-rate
//! period: each grid sample is the time-average of the waveform over its
//! cell. Edge times are never snapped to the grid — snapping would alias the
//! jitter statistics, while area-exact averaging preserves the in-band error
//! the jitter injects.
//!
//! The analog multiplexer sums M low-rate NRZ DACs driven by clocks offset by
//! one high-rate period each. With ideal clocks this is sample-for-sample the
//! high-rate stream filtered by the order-M comb (moving average), which
//! [`dt_model_check`] verifies to machine precision.

use crate::error::{Error, Result};
use crate::interleave::{ti_multiplex_digital, LowRateBank};
use crate::modulator::BitStream;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// I.i.d. Gaussian edge-deviation model: every realized clock edge moves by
/// τ ~ N(0, σ_τ²), independently per edge, deterministic given the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterSpec {
    /// Standard deviation of the edge deviation, in seconds.
    pub sigma_tau: f64,
    pub seed: u64,
}

impl JitterSpec {
    /// No jitter; edges land exactly on the ideal grid.
    pub fn none() -> Self {
        Self {
            sigma_tau: 0.0,
            seed: 0,
        }
    }

    pub fn new(sigma_tau: f64, seed: u64) -> Self {
        Self { sigma_tau, seed }
    }
}

/// Realized rising-edge instants of one conversion clock.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockTrain {
    pub period: f64,
    pub phase: f64,
    /// t_n = n·period + phase + τ_n.
    pub edges: Vec<f64>,
}

/// Generate `count` clock edges with the given period, phase offset and
/// jitter. σ_τ must stay below a quarter period so edges cannot reorder.
pub fn make_clock(period: f64, phase: f64, jitter: &JitterSpec, count: usize) -> Result<ClockTrain> {
    if count < 1 {
        return Err(Error::InvalidArgument("clock needs at least one edge".into()));
    }
    if !(period > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "clock period must be positive, got {period}"
        )));
    }
    if jitter.sigma_tau < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "jitter sigma must be >= 0, got {}",
            jitter.sigma_tau
        )));
    }
    let limit = 0.25 * period;
    if jitter.sigma_tau >= limit {
        return Err(Error::JitterTooLarge {
            sigma: jitter.sigma_tau,
            limit,
        });
    }
    let mut edges = Vec::with_capacity(count);
    if jitter.sigma_tau == 0.0 {
        for n in 0..count {
            edges.push(n as f64 * period + phase);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(jitter.seed);
        let normal = Normal::new(0.0, jitter.sigma_tau).expect("sigma checked above");
        for n in 0..count {
            edges.push(n as f64 * period + phase + normal.sample(&mut rng));
        }
    }
    Ok(ClockTrain {
        period,
        phase,
        edges,
    })
}

/// A piecewise-constant voltage rasterized area-exactly onto a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogWaveform {
    /// Grid-cell averages, `samples_per_period` cells per high-rate period.
    pub samples: Vec<f64>,
    /// Cells per high-rate period (the grid runs at K·f_H).
    pub samples_per_period: usize,
    /// High-rate period T_H the grid is referenced to.
    pub period: f64,
    /// Exact breakpoint list (start time, level from that time on). The level
    /// is 0 before the first breakpoint; the last breakpoint returns to 0.
    pub edges: Vec<(f64, f64)>,
}

impl AnalogWaveform {
    pub fn grid_dt(&self) -> f64 {
        self.period / self.samples_per_period as f64
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.grid_dt()
    }

    /// Number of high-rate periods covered.
    pub fn periods(&self) -> usize {
        self.samples.len() / self.samples_per_period
    }

    /// ∫v(t)dt over the grid, compensated summation.
    pub fn integral(&self) -> f64 {
        kahan_sum(self.samples.iter().copied()) * self.grid_dt()
    }

    /// Grid samples of one high-rate period.
    pub fn period_cells(&self, n: usize) -> &[f64] {
        let k = self.samples_per_period;
        &self.samples[n * k..(n + 1) * k]
    }
}

/// Neumaier-compensated sum; plain accumulation drifts at the magnitudes the
/// area-conservation checks run at.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// One DAC path feeding the rasterizer: symbol q holds from edges[q] to
/// edges[q+1], scaled by `weight`.
struct Path<'a> {
    edges: &'a [f64],
    symbols: &'a [f64],
    weight: f64,
}

/// Merge the paths' edge events into one breakpoint list (time, total level).
///
/// Latch semantics: at each edge the path switches to its next symbol; the
/// total level is recomputed from all path levels at every event, so no
/// rounding drift accumulates across events.
fn merge_segments(paths: &[Path<'_>]) -> Vec<(f64, f64)> {
    // (time, path, level after this event)
    let mut events: Vec<(f64, usize, f64)> = Vec::new();
    for (p, path) in paths.iter().enumerate() {
        for (q, &s) in path.symbols.iter().enumerate() {
            events.push((path.edges[q], p, s * path.weight));
        }
        events.push((*path.edges.last().unwrap(), p, 0.0));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut levels = vec![0.0f64; paths.len()];
    let mut segments: Vec<(f64, f64)> = Vec::with_capacity(events.len());
    let mut idx = 0;
    while idx < events.len() {
        let t = events[idx].0;
        while idx < events.len() && events[idx].0 == t {
            levels[events[idx].1] = events[idx].2;
            idx += 1;
        }
        let total: f64 = levels.iter().sum();
        if let Some(last) = segments.last_mut() {
            if last.0 == t {
                last.1 = total;
                continue;
            }
        }
        segments.push((t, total));
    }
    segments
}

/// Rasterize a breakpoint list onto `n_cells` cells of width `dt` starting at
/// t = 0. Cell m receives the average level over [m·dt, (m+1)·dt); waveform
/// content outside the grid is dropped.
fn rasterize(segments: &[(f64, f64)], dt: f64, n_cells: usize) -> Vec<f64> {
    let mut samples = vec![0.0f64; n_cells];
    let t_end = n_cells as f64 * dt;
    for w in segments.windows(2) {
        let (t0, level) = w[0];
        let t1 = w[1].0;
        add_span(&mut samples, dt, t_end, t0, t1, level);
    }
    // last breakpoint's level is 0 by construction, nothing to add after it
    samples
}

fn add_span(samples: &mut [f64], dt: f64, t_end: f64, t0: f64, t1: f64, level: f64) {
    if level == 0.0 {
        return;
    }
    let a = t0.max(0.0);
    let b = t1.min(t_end);
    if b <= a {
        return;
    }
    let first = (a / dt).floor() as usize;
    let last = ((b / dt).ceil() as usize).min(samples.len());
    for (c, sample) in samples.iter_mut().enumerate().take(last).skip(first) {
        let cell_a = c as f64 * dt;
        let cell_b = cell_a + dt;
        let overlap = b.min(cell_b) - a.max(cell_a);
        if overlap > 0.0 {
            *sample += level * overlap / dt;
        }
    }
}

/// Convert a high-rate bit stream to its NRZ waveform: level y(n) holds from
/// realized edge n to realized edge n+1, so each edge deviation stretches one
/// pulse and shrinks its neighbour.
///
/// The grid spans the stream's ideal duration, `y.len()` periods of
/// `clock.period`, at `k` cells per period.
pub fn render_nrz(y: &BitStream, clock: &ClockTrain, k: usize) -> Result<AnalogWaveform> {
    if clock.edges.len() != y.len() + 1 {
        return Err(Error::EdgeCountMismatch {
            edges: clock.edges.len(),
            symbols: y.len(),
            required: y.len() + 1,
        });
    }
    if k < 8 {
        return Err(Error::InvalidArgument(format!(
            "rendering needs at least 8 cells per period, got {k}"
        )));
    }
    let segments = merge_segments(&[Path {
        edges: &clock.edges,
        symbols: y.as_slice(),
        weight: 1.0,
    }]);
    let dt = clock.period / k as f64;
    let samples = rasterize(&segments, dt, y.len() * k);
    Ok(AnalogWaveform {
        samples,
        samples_per_period: k,
        period: clock.period,
        edges: segments,
    })
}

/// Analog time multiplexer: M low-rate NRZ DACs, one per bank stream, each
/// driven by its own clock (ideally phase p·T_H), summed with weight 1/M.
///
/// The grid is referenced to the high-rate period T_H = T_L / M and spans the
/// bank's duration (streams·M periods) at `k` cells per T_H.
pub fn analog_mux(bank: &LowRateBank, clocks: &[ClockTrain], k: usize) -> Result<AnalogWaveform> {
    let m = bank.m();
    if clocks.len() != m {
        return Err(Error::InvalidArgument(format!(
            "need {m} clocks (one per path), got {}",
            clocks.len()
        )));
    }
    if k < 8 {
        return Err(Error::InvalidArgument(format!(
            "rendering needs at least 8 cells per period, got {k}"
        )));
    }
    let symbols = bank.len();
    for (p, clock) in clocks.iter().enumerate() {
        if clock.edges.len() != symbols + 1 {
            return Err(Error::EdgeCountMismatch {
                edges: clock.edges.len(),
                symbols,
                required: symbols + 1,
            });
        }
        if p == 0 && clock.period <= 0.0 {
            return Err(Error::InvalidArgument("clock period must be positive".into()));
        }
    }
    let t_high = clocks[0].period / m as f64;
    let weight = 1.0 / m as f64;
    let paths: Vec<Path<'_>> = (0..m)
        .map(|p| Path {
            edges: &clocks[p].edges,
            symbols: bank.stream(p).as_slice(),
            weight,
        })
        .collect();
    let segments = merge_segments(&paths);
    let dt = t_high / k as f64;
    let samples = rasterize(&segments, dt, symbols * m * k);
    Ok(AnalogWaveform {
        samples,
        samples_per_period: k,
        period: t_high,
        edges: segments,
    })
}

/// Order-M comb filter (moving average of the last M samples, zero
/// prehistory): the discrete-time model of the analog multiplexer.
pub fn comb_filter(y: &[f64], m: usize) -> Vec<f64> {
    assert!(m >= 1, "comb order must be >= 1");
    let scale = 1.0 / m as f64;
    let mut out = Vec::with_capacity(y.len());
    for n in 0..y.len() {
        let lo = n.saturating_sub(m - 1);
        let sum: f64 = y[lo..=n].iter().sum();
        out.push(sum * scale);
    }
    out
}

/// Result of checking the analog multiplexer against its discrete-time model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtModelReport {
    pub max_abs_diff: f64,
}

/// Render the bank through the analog multiplexer with ideal clocks and
/// compare every grid cell against the comb-filtered multiplexed stream,
/// skipping the first M periods (the comb's zero prehistory fills in).
pub fn dt_model_check(bank: &LowRateBank, k: usize) -> Result<DtModelReport> {
    let m = bank.m();
    let t_low = m as f64;
    let clocks: Vec<ClockTrain> = (0..m)
        .map(|p| make_clock(t_low, p as f64, &JitterSpec::none(), bank.len() + 1))
        .collect::<Result<_>>()?;
    let wf = analog_mux(bank, &clocks, k)?;
    let muxed = ti_multiplex_digital(bank);
    let comb = comb_filter(&muxed, m);
    let mut max_abs_diff = 0.0f64;
    for n in m..wf.periods() {
        for &cell in wf.period_cells(n) {
            max_abs_diff = max_abs_diff.max((cell - comb[n]).abs());
        }
    }
    Ok(DtModelReport { max_abs_diff })
}
