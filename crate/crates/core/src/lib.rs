//! Simulation toolkit for sigma-delta-modulation based digital-to-analog
//! converters.
//!
//! The crate models three output architectures end to end and quantifies
//! their robustness against clock jitter:
//!
//! * the classical error-feedback modulator driving one high-rate NRZ DAC
//!   ([`modulator`], [`waveform`]),
//! * its time-interleaved polyphase equivalent with digital multiplexing
//!   ([`interleave`]),
//! * the analog-multiplexed stage where M low-rate DACs on phase-shifted
//!   clocks are summed directly ([`waveform`]), whose discrete-time model is
//!   an order-M comb filter.
//!
//! [`spectrum`] and [`metrics`] provide the PSD estimation, SNDR, and the
//! closed-form jitter SNR relations used to assess the architectures;
//! [`chain`] wires complete signal paths and sweeps them over amplitude.

pub mod chain;
pub mod error;
pub mod fir;
pub mod interleave;
pub mod io;
pub mod metrics;
pub mod modulator;
pub mod seed;
pub mod spectrum;
pub mod waveform;

pub use chain::{dr_sweep, run_chain, Architecture, ChainConfig, ChainRun, DrCurve, DrPoint};
pub use error::{Error, Result};
pub use fir::{FirFilter, RateTag};
pub use interleave::{
    build_block_filter, equivalence_check, polyphase_decompose, ti_demultiplex, ti_modulate,
    ti_modulate_with_filter, ti_multiplex_digital, BlockFilter, EquivalenceReport, LowRateBank,
    PolyphaseSet, TiOutput,
};
pub use metrics::{
    comb_response, compute_sndr, dac_step, measure_sigma_dy, min_osr_for_distortion,
    predict_snr_jtt1, snr_improvement_db, CombResponse, MetricConfig, SndrResult,
};
pub use modulator::{
    ef_modulate, make_loop_filter, ntf_of, BitStream, EfOutput, ErrorFeedbackModulator,
    QuantizerSpec,
};
pub use seed::derive_seed;
pub use spectrum::{estimate_psd, PsdConfig, SpectrumEstimate};
pub use waveform::{
    analog_mux, comb_filter, dt_model_check, make_clock, render_nrz, AnalogWaveform, ClockTrain,
    DtModelReport, JitterSpec,
};
