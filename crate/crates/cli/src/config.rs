//! Scenario configuration: defaults, INI-style config files, and the
//! command-line overrides layered on top.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    /// Ideal-case PSD and SNDR of the classical and analog-mux outputs.
    Fig4,
    /// Dynamic-range curves of the three architectures under jitter.
    Fig6,
    /// PSDs when jitter dominates the noise budget.
    Fig7,
    /// Bit-exactness audit of the TI and DT-model equivalences.
    Equivalence,
    /// Generic dynamic-range sweep without figure-specific assertions.
    Sweep,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig4 => "fig4",
            Scenario::Fig6 => "fig6",
            Scenario::Fig7 => "fig7",
            Scenario::Equivalence => "equivalence",
            Scenario::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub order: usize,
    pub m: usize,
    pub osr: usize,
    pub amp_dbfs: f64,
    pub fx_fraction: f64,
    /// None means "use the scenario default" (0 for fig4/equivalence/sweep,
    /// 0.015 for fig6/fig7).
    pub sigma_tau: Option<f64>,
    pub correlated: bool,
    pub k: usize,
    pub dump_waveform: bool,
    pub psd_segment: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Amplitude grid for fig6/sweep, dBFS, strictly increasing.
    pub sweep_amps: Vec<f64>,
    /// Audit hook: corrupt block-filter entry (row, col) before checking.
    pub corrupt_entry: Option<(usize, usize)>,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            order: 2,
            m: 4,
            osr: 64,
            amp_dbfs: -3.0,
            fx_fraction: 0.2,
            sigma_tau: None,
            correlated: false,
            k: 32,
            dump_waveform: false,
            psd_segment: 1 << 14,
            n_samples: 1 << 18,
            seed: 1,
            out_dir: PathBuf::from("out"),
            sweep_amps: (0..=16).map(|i| -80.0 + 5.0 * i as f64).collect(),
            corrupt_entry: None,
        }
    }

    /// Jitter sigma after applying the scenario default; fig4 always forces 0.
    pub fn resolved_sigma_tau(&self) -> f64 {
        match self.scenario {
            Scenario::Fig4 => 0.0,
            Scenario::Fig6 | Scenario::Fig7 => self.sigma_tau.unwrap_or(0.015),
            Scenario::Equivalence | Scenario::Sweep => self.sigma_tau.unwrap_or(0.0),
        }
    }

    /// Apply one `section.key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |what: &str| format!("invalid value {value:?} for {key}: expected {what}");
        match key {
            "modulator.order" => self.order = value.parse().map_err(|_| bad("integer"))?,
            "interleave.m" => self.m = value.parse().map_err(|_| bad("integer"))?,
            "signal.osr" => self.osr = value.parse().map_err(|_| bad("integer"))?,
            "signal.amp_dbfs" => self.amp_dbfs = value.parse().map_err(|_| bad("number"))?,
            "signal.fx_fraction" => self.fx_fraction = value.parse().map_err(|_| bad("number"))?,
            "jitter.sigma_tau" => {
                self.sigma_tau = Some(value.parse().map_err(|_| bad("number"))?)
            }
            "jitter.correlated" => self.correlated = value.parse().map_err(|_| bad("bool"))?,
            "render.k" => self.k = value.parse().map_err(|_| bad("integer"))?,
            "render.dump_waveform" => {
                self.dump_waveform = value.parse().map_err(|_| bad("bool"))?
            }
            "psd.segment" => self.psd_segment = value.parse().map_err(|_| bad("integer"))?,
            "run.samples" => self.n_samples = value.parse().map_err(|_| bad("integer"))?,
            "run.seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "run.out" => self.out_dir = PathBuf::from(value),
            "sweep.amps" => self.sweep_amps = parse_amp_grid(value)?,
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    /// Load `section.key = value` pairs from an INI-style file.
    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    lineno + 1
                ));
            };
            if section.is_empty() {
                return Err(format!(
                    "{}:{}: key {key:?} appears before any [section]",
                    path.display(),
                    lineno + 1
                ));
            }
            self.set(
                &format!("{section}.{}", key.trim()),
                value.trim(),
            )?;
        }
        Ok(())
    }

    /// Every resolved setting, for the manifest (sorted, deterministic).
    pub fn entries(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("scenario".into(), self.scenario.to_string());
        map.insert("modulator.order".into(), self.order.to_string());
        map.insert("interleave.m".into(), self.m.to_string());
        map.insert("signal.osr".into(), self.osr.to_string());
        map.insert("signal.amp_dbfs".into(), self.amp_dbfs.to_string());
        map.insert("signal.fx_fraction".into(), self.fx_fraction.to_string());
        map.insert(
            "jitter.sigma_tau".into(),
            self.resolved_sigma_tau().to_string(),
        );
        map.insert("jitter.correlated".into(), self.correlated.to_string());
        map.insert("render.k".into(), self.k.to_string());
        map.insert("render.dump_waveform".into(), self.dump_waveform.to_string());
        map.insert("psd.segment".into(), self.psd_segment.to_string());
        map.insert("run.samples".into(), self.n_samples.to_string());
        map.insert("run.seed".into(), self.seed.to_string());
        map.insert("run.out".into(), self.out_dir.display().to_string());
        if matches!(self.scenario, Scenario::Fig6 | Scenario::Sweep) {
            map.insert(
                "sweep.amps".into(),
                self.sweep_amps
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if let Some((i, j)) = self.corrupt_entry {
            map.insert("equivalence.corrupt_entry".into(), format!("{i},{j}"));
        }
        map
    }

    /// Cross-field validation run once after all overrides are applied.
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=2).contains(&self.order) {
            return Err(format!("modulator.order must be 1 or 2, got {}", self.order));
        }
        if self.m < 1 || self.m > 64 {
            return Err(format!("interleave.m must be in 1..=64, got {}", self.m));
        }
        if self.osr < 2 {
            return Err(format!("signal.osr must be >= 2, got {}", self.osr));
        }
        if self.amp_dbfs > 0.0 {
            return Err(format!(
                "signal.amp_dbfs must be <= 0 dBFS, got {}",
                self.amp_dbfs
            ));
        }
        if !(0.0 < self.fx_fraction && self.fx_fraction < 1.0) {
            return Err(format!(
                "signal.fx_fraction must be in (0, 1), got {}",
                self.fx_fraction
            ));
        }
        if let Some(s) = self.sigma_tau {
            if !(0.0..0.25).contains(&s) {
                return Err(format!("jitter.sigma_tau must be in [0, 0.25), got {s}"));
            }
        }
        if self.k < 8 {
            return Err(format!("render.k must be >= 8, got {}", self.k));
        }
        if self.n_samples % self.m != 0 {
            return Err(format!(
                "run.samples ({}) must be a multiple of interleave.m ({})",
                self.n_samples, self.m
            ));
        }
        if let Some((i, j)) = self.corrupt_entry {
            if i >= self.m || j >= self.m {
                return Err(format!(
                    "corrupt entry ({i},{j}) outside the {0}x{0} block filter",
                    self.m
                ));
            }
        }
        Ok(())
    }
}

fn parse_amp_grid(value: &str) -> Result<Vec<f64>, String> {
    let amps: Vec<f64> = if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("amplitude range must be start:end:step, got {value:?}"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| "bad range start".to_string())?;
        let end: f64 = parts[1].trim().parse().map_err(|_| "bad range end".to_string())?;
        let step: f64 = parts[2].trim().parse().map_err(|_| "bad range step".to_string())?;
        if step <= 0.0 || end < start {
            return Err(format!("degenerate amplitude range {value:?}"));
        }
        let n = ((end - start) / step).round() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    } else {
        value
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad amplitude {s:?}")))
            .collect::<Result<_, _>>()?
    };
    if amps.is_empty() {
        return Err("empty amplitude grid".into());
    }
    if amps.windows(2).any(|w| w[0] >= w[1]) {
        return Err("amplitude grid must be strictly increasing".into());
    }
    Ok(amps)
}

pub fn parse_corrupt_entry(value: &str) -> Result<(usize, usize), String> {
    let (i, j) = value
        .split_once(',')
        .ok_or_else(|| format!("--corrupt-entry expects `row,col`, got {value:?}"))?;
    Ok((
        i.trim().parse().map_err(|_| format!("bad row {i:?}"))?,
        j.trim().parse().map_err(|_| format!("bad col {j:?}"))?,
    ))
}
