//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`) before asserting.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sdmlab_core::*;
use std::time::Instant;

fn criterion(n: u32, name: &str, ok: bool, details: &str, started: Instant) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!(
        "acceptance criterion {n} ({name}): {verdict} — {details} [{:.1}s]",
        started.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {n} ({name}): {details}");
}

#[test]
fn criterion_1_ti_digital_equivalence() {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xAC01);
    let mut checks = 0usize;
    let mut ok = true;
    let mut details = String::new();
    'outer: for trial in 0..20 {
        let x: Vec<f64> = (0..4096).map(|_| rng.gen_range(-0.9..0.9)).collect();
        for m in [1usize, 2, 4] {
            for order in [1usize, 2] {
                let report = equivalence_check(&x, m, order).unwrap();
                checks += 1;
                if !report.passes(m) {
                    ok = false;
                    details = format!("trial {trial} m={m} L={order}: {report:?}");
                    break 'outer;
                }
            }
        }
    }
    if ok {
        details = format!("{checks} checks bit-exact at delay M");
    }
    criterion(1, "TI digital equivalence", ok, &details, t);
}

#[test]
fn criterion_2_dt_comb_model_equivalence() {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xAC02);
    let mut worst = 0.0f64;
    let h = make_loop_filter(2).unwrap();
    let q = QuantizerSpec::default();
    for &m in &[1usize, 2, 4, 8] {
        // banks from the actual TI modulator
        let x: Vec<f64> = (0..1024 * m).map(|_| rng.gen_range(-0.9..0.9)).collect();
        let ti = ti_modulate(&x, m, &h, &q).unwrap();
        worst = worst.max(dt_model_check(&ti.bank, 16).unwrap().max_abs_diff);
        // and purely random banks
        for _ in 0..10 {
            let streams = (0..m)
                .map(|_| {
                    BitStream::from_symbols(
                        (0..256)
                            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                            .collect(),
                    )
                })
                .collect();
            let bank = LowRateBank::new(streams).unwrap();
            worst = worst.max(dt_model_check(&bank, 16).unwrap().max_abs_diff);
        }
    }
    criterion(
        2,
        "DT comb-model equivalence",
        worst <= 1e-12,
        &format!("max |analog mux - comb| = {worst:.3e}"),
        t,
    );
}

#[test]
fn criterion_3_ideal_sndr() {
    let t = Instant::now();
    let cfg = ChainConfig::default(); // OSR 64, L 2, M 4, -3 dBFS, fx = B/5, 2^18
    let classical = run_chain(Architecture::Classical, &cfg).unwrap();
    let proposed = run_chain(Architecture::AnalogMux, &cfg).unwrap();
    let (v, g) = (classical.sndr.sndr_db, proposed.sndr.sndr_db);
    let ok = (v - 69.7).abs() <= 1.0 && (g - 69.7).abs() <= 1.0;
    criterion(
        3,
        "ideal SNDR 69.7 +/- 1 dB",
        ok,
        &format!("classical {v:.2} dB, analog mux {g:.2} dB"),
        t,
    );
}

#[test]
fn criterion_4_comb_response() {
    let t = Instant::now();
    let z1 = comb_response(4, 0.25).magnitude;
    let z2 = comb_response(4, 0.5).magnitude;
    let target = std::f64::consts::FRAC_1_SQRT_2;
    let (mut lo, mut hi) = (0.0f64, 0.25f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if comb_response(4, mid).magnitude > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fc = 0.5 * (lo + hi);
    let osr = min_osr_for_distortion(4, 3.0).unwrap();
    let ok = z1 < 1e-12 && z2 < 1e-12 && (fc - 0.114).abs() <= 0.001 && (osr - 4.4).abs() <= 0.1;
    criterion(
        4,
        "comb zeros, cutoff, min OSR",
        ok,
        &format!("|H(0.25)|={z1:.1e} |H(0.5)|={z2:.1e} fc={fc:.4} minOSR={osr:.2}"),
        t,
    );
}

fn jittered_runs(arch: Architecture, m: usize, seeds: std::ops::Range<u64>) -> Vec<ChainRun> {
    seeds
        .map(|seed| {
            let cfg = ChainConfig {
                m,
                sigma_tau: 0.015,
                seed,
                ..Default::default()
            };
            run_chain(arch, &cfg).unwrap()
        })
        .collect()
}

#[test]
fn criterion_5_jitter_baseline_and_closed_form() {
    let t = Instant::now();
    let runs = jittered_runs(Architecture::Classical, 4, 1..4);
    let sim = runs.iter().map(|r| r.sndr.sndr_db).sum::<f64>() / runs.len() as f64;
    let predicted = runs
        .iter()
        .map(|r| {
            predict_snr_jtt1(
                r.amplitude / std::f64::consts::SQRT_2,
                1.0,
                0.015,
                r.sigma_dy,
                64,
            )
        })
        .sum::<f64>()
        / runs.len() as f64;
    let ok = (sim - 47.0).abs() <= 2.0 && (predicted - sim).abs() <= 1.5;
    criterion(
        5,
        "jitter baseline 47 +/- 2 dB and closed form within 1.5 dB",
        ok,
        &format!("simulated {sim:.2} dB, predicted {predicted:.2} dB"),
        t,
    );
}

#[test]
fn criterion_6_jitter_improvement() {
    let t = Instant::now();
    let mut details = String::new();
    let mut ok = true;
    for m in [4usize, 2] {
        let classical = jittered_runs(Architecture::Classical, m, 11..14);
        let proposed = jittered_runs(Architecture::AnalogMux, m, 11..14);
        let gap = classical
            .iter()
            .zip(&proposed)
            .map(|(c, p)| p.sndr.sndr_db - c.sndr.sndr_db)
            .sum::<f64>()
            / classical.len() as f64;
        let expected = snr_improvement_db(m);
        ok &= (gap - expected).abs() <= 2.0;
        details.push_str(&format!("M={m}: gap {gap:.2} dB (expect {expected:.2}); "));
    }
    criterion(6, "jitter improvement 20log10(M) +/- 2 dB", ok, &details, t);
}

#[test]
fn criterion_7_property_suites() {
    let t = Instant::now();
    let mut failures: Vec<String> = Vec::new();

    // Parseval within 0.1% on a real chain waveform
    let run = run_chain(
        Architecture::Classical,
        &ChainConfig {
            n_samples: 1 << 17,
            samples_per_period: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let est = estimate_psd(
        run.analysis_samples(),
        &PsdConfig {
            segment_len: 1 << 14,
            overlap: 0.5,
            sample_rate: 8.0,
        },
    )
    .unwrap();
    let samples = run.analysis_samples();
    let time_power = samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64;
    let rel = (est.integrated_power() - time_power).abs() / time_power;
    if rel > 1e-3 {
        failures.push(format!("Parseval {rel:.2e}"));
    }

    // polyphase recomposition, exact
    let mut rng = StdRng::seed_from_u64(0xAC07);
    for _ in 0..50 {
        let len = rng.gen_range(1..=16);
        let taps: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let h = FirFilter::new(taps, RateTag::High);
        for m in [1usize, 2, 3, 4, 8] {
            let p = polyphase_decompose(&h, m).unwrap();
            if p.recompose().coeffs() != h.coeffs() {
                failures.push(format!("recomposition m={m}"));
            }
        }
    }

    // pseudo-circulance, exact
    let h = make_loop_filter(2).unwrap();
    for m in [2usize, 4, 8] {
        let bf = build_block_filter(&h, m).unwrap();
        let poly = polyphase_decompose(&h, m).unwrap();
        for i in 0..m {
            for j in 0..m {
                let base = poly.component((j + m - i) % m);
                let expected = if j < i { base.delayed(1) } else { base.clone() };
                if bf.entry(i, j) != &expected {
                    failures.push(format!("pseudo-circulance ({i},{j}) m={m}"));
                }
            }
        }
    }

    // area conservation to 1e-12, with and without jitter
    let y = BitStream::from_symbols(
        (0..2048)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect(),
    );
    for jitter in [JitterSpec::none(), JitterSpec::new(0.02, 9)] {
        let c = make_clock(1.0, 0.0, &jitter, 2049).unwrap();
        let wf = render_nrz(&y, &c, 32).unwrap();
        let t_end = wf.duration();
        let expected = kahan_sum((0..y.len()).map(|n| {
            let a = c.edges[n].max(0.0);
            let b = c.edges[n + 1].min(t_end);
            y[n] * (b - a).max(0.0)
        }));
        if (wf.integral() - expected).abs() > 1e-12 {
            failures.push(format!("area conservation sigma={}", jitter.sigma_tau));
        }
    }

    // comb output level count, exact
    for m in [2usize, 4, 8] {
        let bits: Vec<f64> = (0..1 << 14)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let mut levels: Vec<f64> = comb_filter(&bits, m)[m - 1..].to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        if levels.len() != m + 1 {
            failures.push(format!("comb levels m={m}: {}", levels.len()));
        }
    }

    // seed reproducibility: identical configs give byte-identical CSVs
    let cfg = ChainConfig {
        n_samples: 1 << 16,
        samples_per_period: 8,
        sigma_tau: 0.015,
        seed: 77,
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for pass in 0..2 {
        let run = run_chain(Architecture::AnalogMux, &cfg).unwrap();
        let est = estimate_psd(
            run.analysis_samples(),
            &PsdConfig {
                segment_len: 4096,
                overlap: 0.5,
                sample_rate: 8.0,
            },
        )
        .unwrap();
        let path = dir.path().join(format!("psd{pass}.csv"));
        io::write_psd_csv(&path, &est).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    if bytes[0] != bytes[1] {
        failures.push("seed reproducibility".into());
    }

    let ok = failures.is_empty();
    let details = if ok {
        "Parseval, recomposition, pseudo-circulance, area, comb levels, reproducibility".into()
    } else {
        failures.join("; ")
    };
    criterion(7, "property suites", ok, &details, t);
}

use sdmlab_core::waveform::kahan_sum;
