//! Run manifests: everything needed to reproduce a run byte-for-byte, plus
//! checksums of what it produced. Identical manifests (timestamp aside)
//! imply identical outputs.

use crate::config::ScenarioConfig;
use sdmlab_core::chain::seed_stage;
use sdmlab_core::derive_seed;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct Manifest {
    config: ScenarioConfig,
    notes: Vec<String>,
    outputs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            config: config.clone(),
            notes: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Record a free-form note (forced settings, recorded snaps, failures).
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Record an output file and its checksum.
    pub fn add_output(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.push((name, format!("{digest:x}")));
        Ok(())
    }

    /// Write `manifest.txt` into the output directory.
    pub fn write(&self, out_dir: &Path) -> std::io::Result<PathBuf> {
        let path = out_dir.join("manifest.txt");
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(f, "tool = sdmlab {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(f, "timestamp = {}", chrono::Utc::now().to_rfc3339())?;
        writeln!(f)?;
        writeln!(f, "[config]")?;
        for (key, value) in self.config.entries() {
            writeln!(f, "{key} = {value}")?;
        }
        writeln!(f)?;
        writeln!(f, "[seeds]")?;
        writeln!(f, "master = {}", self.config.seed)?;
        writeln!(
            f,
            "# stage seeds: splitmix64(master + (stream+1)*golden); clock of path p uses stream {}+p, sweep point i uses stream {}+i",
            seed_stage::CLOCK_BASE,
            seed_stage::SWEEP_BASE
        )?;
        for p in 0..self.config.m.min(8) {
            writeln!(
                f,
                "clock.path{p} = {}",
                derive_seed(self.config.seed, seed_stage::CLOCK_BASE + p as u64)
            )?;
        }
        if !self.notes.is_empty() {
            writeln!(f)?;
            writeln!(f, "[notes]")?;
            for n in &self.notes {
                writeln!(f, "- {n}")?;
            }
        }
        writeln!(f)?;
        writeln!(f, "[outputs]")?;
        for (name, digest) in &self.outputs {
            writeln!(f, "{name} = sha256:{digest}")?;
        }
        f.flush()?;
        Ok(path)
    }
}
