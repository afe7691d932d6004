//! File helpers for experiment and command outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use covoter::Histogram;
use serde::Serialize;

/// Creates `dir/name` and hands a buffered writer to `f`.
pub fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    write_with(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

/// Histogram with its Beta comparison, or without it when the shapes are
/// degenerate (consensus).
pub fn write_histogram(dir: &Path, name: &str, h: &Histogram, a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 {
        return write_with(dir, name, |w| h.write_csv(a, b, w));
    }
    write_with(dir, name, |w| {
        writeln!(w, "bin_left,bin_right,mass,beta_mass")?;
        for (k, m) in h.masses().iter().enumerate() {
            writeln!(w, "{},{},{},", h.edges[k], h.edges[k + 1], m)?;
        }
        Ok(())
    })
}
