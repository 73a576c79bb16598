//! Trace CSV and summary JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::Summary;
use crate::error::Result;
use crate::ipm::SolveTrace;

pub const TRACE_HEADER: [&str; 8] = ["k", "engine_phase", "objective", "mu", "r_p_inf", "r_d_inf", "r_c_inf", "alpha"];

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e15)`.
fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// One row per iteration record; the header is written even for an empty trace.
pub fn emit_trace_csv(trace: &SolveTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            r.engine_phase.name().to_string(),
            number(r.objective),
            number(r.mu),
            number(r.r_p_inf),
            number(r.r_d_inf),
            number(r.r_c_inf),
            number(r.alpha),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_summary_json(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_summary_json(path: impl AsRef<Path>) -> Result<Summary> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Per-cell trace file of a multi-cell plan: `<stem>_s{scale}_seed{seed}.csv`
/// next to `base`.
pub fn cell_trace_path(base: &Path, load_scale: f64, seed: u64) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "trace".into());
    let ext = base.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    base.with_file_name(format!("{stem}_s{load_scale:.2}_seed{seed}.{ext}"))
}
