//! Cross-module invariants: structural identities that must hold exactly and
//! statistical laws that must hold within stated tolerances.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sdmlab_core::*;

fn random_input(n: usize, amp: f64, rng: &mut StdRng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-amp..amp)).collect()
}

fn random_bank(m: usize, len: usize, rng: &mut StdRng) -> LowRateBank {
    let streams = (0..m)
        .map(|_| {
            BitStream::from_symbols(
                (0..len)
                    .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                    .collect(),
            )
        })
        .collect();
    LowRateBank::new(streams).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn polyphase_recomposition_is_exact(
        taps in prop::collection::vec(-10.0f64..10.0, 1..=16),
        m in prop::sample::select(vec![1usize, 2, 3, 4, 8]),
    ) {
        let h = FirFilter::new(taps, RateTag::High);
        let p = polyphase_decompose(&h, m).unwrap();
        let recomposed = p.recompose();
        prop_assert_eq!(recomposed.coeffs(), h.coeffs());
    }

    #[test]
    fn multiplex_demultiplex_round_trip(
        m in 1usize..=6,
        steps in 1usize..=32,
        seed in any::<u64>(),
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bank = random_bank(m, steps, &mut rng);
        let muxed = ti_multiplex_digital(&bank);
        prop_assert_eq!(ti_demultiplex(&muxed, m).unwrap(), bank);
    }

    #[test]
    fn comb_output_stays_on_the_level_grid(
        m in 1usize..=8,
        seed in any::<u64>(),
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let y: Vec<f64> = (0..512).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let out = comb_filter(&y, m);
        for (n, &v) in out.iter().enumerate().skip(m - 1) {
            // v must be one of the M+1 levels -1, -1+2/M, ..., +1
            let level = (v + 1.0) * m as f64 / 2.0;
            prop_assert!((level - level.round()).abs() < 1e-12, "n={} v={}", n, v);
        }
    }
}

#[test]
fn ti_equivalence_over_random_inputs() {
    let mut rng = StdRng::seed_from_u64(0xE0);
    for trial in 0..100 {
        let x = random_input(4096, 0.9, &mut rng);
        for m in [2usize, 4] {
            for order in [1usize, 2] {
                let report = equivalence_check(&x, m, order).unwrap();
                assert!(
                    report.passes(m),
                    "trial {trial} m={m} order={order}: {report:?}"
                );
            }
        }
    }
}

#[test]
fn dt_model_equivalence_over_random_banks() {
    let mut rng = StdRng::seed_from_u64(0xD7);
    for &m in &[1usize, 2, 4, 8] {
        for trial in 0..50 {
            let bank = random_bank(m, 128, &mut rng);
            let report = dt_model_check(&bank, 16).unwrap();
            assert!(
                report.max_abs_diff <= 1e-12,
                "m={m} trial {trial}: {report:?}"
            );
        }
    }
}

#[test]
fn comb_levels_are_exactly_m_plus_one() {
    let mut rng = StdRng::seed_from_u64(0xC0);
    for m in [2usize, 4, 8] {
        let y: Vec<f64> = (0..1 << 14)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let out = comb_filter(&y, m);
        let mut levels: Vec<f64> = out[m - 1..].to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels.len(), m + 1, "m={m}: {levels:?}");
    }
}

/// Shared setup for the jitter-law checks: classical chain SNDR at a sigma
/// grid, 3 seeds each, at a reduced but still valid record length.
fn classical_sndr_at(sigma: f64, m: usize, arch: Architecture, seed: u64) -> (f64, f64, f64) {
    let cfg = ChainConfig {
        m,
        n_samples: 1 << 16,
        samples_per_period: 16,
        sigma_tau: sigma,
        seed,
        ..Default::default()
    };
    let run = run_chain(arch, &cfg).unwrap();
    (run.sndr.sndr_db, run.sigma_dy, run.amplitude)
}

#[test]
fn jitter_degrades_sndr_monotonically_and_tracks_the_closed_form() {
    let sigmas = [0.005, 0.01, 0.02, 0.04];
    let ideal = classical_sndr_at(0.0, 4, Architecture::Classical, 1).0;

    let mut means = Vec::new();
    let mut predictions = Vec::new();
    for (i, &sigma) in sigmas.iter().enumerate() {
        let mut sum = 0.0;
        let mut pred = 0.0;
        for seed in 0..3u64 {
            let (sndr, sigma_dy, amplitude) =
                classical_sndr_at(sigma, 4, Architecture::Classical, 10 + 7 * i as u64 + seed);
            sum += sndr;
            pred += predict_snr_jtt1(
                amplitude / std::f64::consts::SQRT_2,
                1.0,
                sigma,
                sigma_dy,
                64,
            );
        }
        means.push(sum / 3.0);
        predictions.push(pred / 3.0);
    }

    for w in means.windows(2) {
        assert!(
            w[1] < w[0],
            "SNDR must fall as jitter grows: {means:?} (sigmas {sigmas:?})"
        );
    }
    for (i, (&mean, &pred)) in means.iter().zip(&predictions).enumerate() {
        // only where jitter dominates quantization noise by 10 dB
        if pred <= ideal - 10.0 {
            assert!(
                (mean - pred).abs() <= 1.5,
                "sigma={} simulated {mean} vs predicted {pred}",
                sigmas[i]
            );
        }
    }
}

#[test]
fn analog_mux_gap_tracks_twenty_log_m() {
    let sigma = 0.015;
    for m in [2usize, 4] {
        let mut gap_sum = 0.0;
        for seed in 0..3u64 {
            let classical = classical_sndr_at(sigma, m, Architecture::Classical, 40 + seed).0;
            let proposed = classical_sndr_at(sigma, m, Architecture::AnalogMux, 40 + seed).0;
            gap_sum += proposed - classical;
        }
        let gap = gap_sum / 3.0;
        let expected = snr_improvement_db(m);
        assert!(
            (gap - expected).abs() <= 2.0,
            "m={m}: gap {gap} vs 20log10(M) = {expected}"
        );
    }
}
