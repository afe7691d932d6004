use std::io::{BufRead, Write};

use super::StepGraphon;
use crate::error::{contract, Result};

impl StepGraphon {
    /// Binary PGM (P5) heatmap with `side × side` pixels. Column index is `x`
    /// increasing left to right, row index is `y` increasing top to bottom.
    /// Value 1 is black, value 0 white.
    pub fn write_pgm(&self, side: usize, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "P5\n{side} {side}\n255\n")?;
        let blocks: Vec<usize> = (0..side).map(|p| self.block_of((p as f64 + 0.5) / side as f64)).collect();
        let mut row = vec![0u8; side];
        for &by in &blocks {
            for (px, &bx) in row.iter_mut().zip(&blocks) {
                let v = self.value(bx, by).clamp(0.0, 1.0);
                *px = (255.0 * (1.0 - v)).round() as u8;
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    /// CSV dump: the boundaries on the first line, then one line per block row.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        writeln!(w, "{}", join(&self.boundaries))?;
        for r in 0..self.blocks() {
            let k = self.blocks();
            writeln!(w, "{}", join(&self.values[r * k..(r + 1) * k]))?;
        }
        Ok(())
    }

    /// Reads the format of [`StepGraphon::write_csv`].
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut rows = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| contract(format!("read failed: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| contract(format!("bad number {s:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(contract("empty graphon file"));
        }
        let boundaries = rows.remove(0);
        let k = boundaries.len().saturating_sub(1);
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(contract(format!("expected {k} rows of {k} values")));
        }
        Self::signed(boundaries, rows.concat())
    }
}
