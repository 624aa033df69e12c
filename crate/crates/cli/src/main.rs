//! `sdmlab` — scenario runner for the sigma-delta DAC simulation toolkit.
//!
//! Exit codes: 0 all assertions passed, 1 configuration or runtime error,
//! 2 at least one scenario assertion failed.

mod config;
mod manifest;
mod scenarios;

use clap::error::ErrorKind;
use clap::Parser;
use config::{parse_corrupt_entry, Scenario, ScenarioConfig};
use scenarios::RunError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "sdmlab",
    version,
    about = "Sigma-delta DAC simulation scenarios: spectra, dynamic range, jitter robustness, equivalence audits"
)]
struct Cli {
    /// Scenario to run
    #[arg(value_enum)]
    scenario: Scenario,

    /// INI-style configuration file (sections of `key = value`)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed (overrides run.seed)
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides run.out)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Interleaving factor (overrides interleave.m)
    #[arg(long = "M", value_name = "N")]
    m: Option<usize>,

    /// Oversampling ratio (overrides signal.osr)
    #[arg(long)]
    osr: Option<usize>,

    /// Jitter standard deviation in units of 1/f_H (overrides jitter.sigma_tau)
    #[arg(long = "sigma-tau", value_name = "X")]
    sigma_tau: Option<f64>,

    /// Input amplitude in dBFS (overrides signal.amp_dbfs)
    #[arg(long = "amp-dbfs", value_name = "X")]
    amp_dbfs: Option<f64>,

    /// Audit hook: corrupt block-filter entry `row,col` before the
    /// equivalence audit (the audit must then fail and locate the damage)
    #[arg(long = "corrupt-entry", value_name = "I,J", hide = true)]
    corrupt_entry: Option<String>,
}

fn resolve(cli: &Cli) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::new(cli.scenario);
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(m) = cli.m {
        cfg.m = m;
    }
    if let Some(osr) = cli.osr {
        cfg.osr = osr;
    }
    if let Some(sigma) = cli.sigma_tau {
        cfg.sigma_tau = Some(sigma);
    }
    if let Some(amp) = cli.amp_dbfs {
        cfg.amp_dbfs = amp;
    }
    if let Some(entry) = &cli.corrupt_entry {
        if cli.scenario != Scenario::Equivalence {
            return Err("--corrupt-entry only applies to the equivalence scenario".into());
        }
        cfg.corrupt_entry = Some(parse_corrupt_entry(entry)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn install_thread_pool() {
    if let Ok(threads) = std::env::var("SDMLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                // ignore failure: the pool can only be installed once
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // usage problems are configuration errors under the exit contract
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    install_thread_pool();

    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("sdmlab: configuration error: {msg}");
            return ExitCode::from(1);
        }
    };

    match scenarios::run(&cfg) {
        Ok(outcome) => {
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            let mut failed = false;
            for a in &outcome.assertions {
                let verdict = if a.ok { "PASS" } else { "FAIL" };
                println!("[{verdict}] {}: {}", a.name, a.details);
                failed |= !a.ok;
            }
            if failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Config(msg)) => {
            eprintln!("sdmlab: configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("sdmlab: {e}");
            ExitCode::from(1)
        }
    }
}
