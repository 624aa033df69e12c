//! CSV output formats.
//!
//! All floating-point values are emitted with 9 significant digits so files
//! are reproducible bit-for-bit across runs with the same configuration.

use crate::chain::DrCurve;
use crate::spectrum::SpectrumEstimate;
use crate::waveform::AnalogWaveform;
use std::io::{self, Write};
use std::path::Path;

/// Format a float with 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        format!("{x}")
    }
}

/// Write `psd.csv`: one `freq_norm,psd_db` row per bin.
pub fn write_psd_csv(path: &Path, spectrum: &SpectrumEstimate) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "freq_norm,psd_db")?;
    for (freq, db) in spectrum.freqs.iter().zip(&spectrum.psd_db) {
        writeln!(f, "{},{}", fmt_sig9(*freq), fmt_sig9(*db))?;
    }
    f.flush()
}

/// Write `dr.csv`: `amp_dbfs,sndr_db,scenario` rows for each curve in turn.
/// Failed points are omitted (they are listed in the run manifest).
pub fn write_dr_csv(path: &Path, curves: &[&DrCurve]) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "amp_dbfs,sndr_db,scenario")?;
    for curve in curves {
        for p in &curve.points {
            if let Some(sndr) = p.sndr_db {
                writeln!(
                    f,
                    "{},{},{}",
                    fmt_sig9(p.amp_dbfs),
                    fmt_sig9(sndr),
                    curve.architecture.name()
                )?;
            }
        }
    }
    f.flush()
}

/// Write `metrics.csv`: `key,value,units` rows.
pub fn write_metrics_csv(path: &Path, rows: &[(String, f64, String)]) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "key,value,units")?;
    for (key, value, units) in rows {
        writeln!(f, "{key},{},{units}", fmt_sig9(*value))?;
    }
    f.flush()
}

/// Provenance recorded at the top of a waveform dump.
#[derive(Debug, Clone, Copy)]
pub struct WaveformHeader {
    pub k: usize,
    pub f_h: f64,
    pub m: usize,
    pub sigma_tau: f64,
    pub seed: u64,
}

/// Dump a rendered waveform as `grid_index,value` rows preceded by a header
/// of `# key = value` lines recording K, f_H, M, sigma_tau and the seed.
pub fn write_waveform_csv(
    path: &Path,
    waveform: &AnalogWaveform,
    header: &WaveformHeader,
) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# k = {}", header.k)?;
    writeln!(f, "# f_h = {}", fmt_sig9(header.f_h))?;
    writeln!(f, "# m = {}", header.m)?;
    writeln!(f, "# sigma_tau = {}", fmt_sig9(header.sigma_tau))?;
    writeln!(f, "# seed = {}", header.seed)?;
    writeln!(f, "grid_index,value")?;
    for (i, s) in waveform.samples.iter().enumerate() {
        writeln!(f, "{i},{}", fmt_sig9(*s))?;
    }
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulator::BitStream;
    use crate::waveform::{make_clock, render_nrz, JitterSpec};

    #[test]
    fn sig9_has_nine_significant_digits() {
        assert_eq!(fmt_sig9(0.25), "2.50000000e-1");
        assert_eq!(fmt_sig9(-69.715), "-6.97150000e1");
        assert_eq!(fmt_sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn waveform_dump_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wave.csv");
        let y = BitStream::from_symbols(vec![1.0, -1.0, 1.0]);
        let clock = make_clock(1.0, 0.0, &JitterSpec::none(), 4).unwrap();
        let wf = render_nrz(&y, &clock, 8).unwrap();
        write_waveform_csv(
            &path,
            &wf,
            &WaveformHeader {
                k: 8,
                f_h: 1.0,
                m: 1,
                sigma_tau: 0.0,
                seed: 42,
            },
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# k = 8\n"));
        assert!(text.contains("# sigma_tau = 0.00000000e0"));
        let rows: Vec<&str> = text.lines().skip(6).collect();
        assert_eq!(rows.len(), wf.samples.len());
        let first: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(first[0], "0");
        assert_eq!(first[1].parse::<f64>().unwrap(), 1.0);
    }
}
