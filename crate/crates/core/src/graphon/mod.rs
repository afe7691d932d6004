//! Block-constant graphons, the reference graphon of the limiting densities
//! and the L1 / cut-norm distances.

mod cut;
mod io;

pub use cut::{cut_norm_exact, cut_norm_lower_bound, MAX_EXACT_BLOCKS};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::model::{DensityField, EdgeKernel};
use crate::sim::Snapshot;

/// Symmetric function on `[0, 1]^2`, constant on the blocks of a partition.
///
/// `values` is row-major `k × k`. Graphons built from graphs or kernels lie
/// in `[0, 1]`; differences of two graphons lie in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepGraphon {
    boundaries: Vec<f64>,
    values: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl StepGraphon {
    /// Validates boundaries, symmetry and the `[0, 1]` range.
    pub fn new(boundaries: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let g = Self::signed(boundaries, values)?;
        if g.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(contract("graphon values must lie in [0, 1]"));
        }
        Ok(g)
    }

    /// Like [`StepGraphon::new`] but accepts values in `[-1, 1]`.
    pub fn signed(boundaries: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = boundaries.len().saturating_sub(1);
        if k == 0 || boundaries[0] != 0.0 || boundaries[k] != 1.0 || boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(contract("boundaries must increase strictly from 0 to 1"));
        }
        if values.len() != k * k {
            return Err(contract(format!("expected {} values for {k} blocks, got {}", k * k, values.len())));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(contract("graphon values must lie in [-1, 1]"));
        }
        for i in 0..k {
            for j in 0..i {
                if (values[i * k + j] - values[j * k + i]).abs() > SYMMETRY_TOL {
                    return Err(contract(format!("values not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { boundaries, values })
    }

    /// `k` equal-width blocks.
    pub fn uniform(values: Vec<f64>, k: usize) -> Result<Self> {
        Self::signed(equal_boundaries(k), values)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![c])
    }

    pub fn blocks(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.blocks() + j]
    }

    pub fn width(&self, i: usize) -> f64 {
        self.boundaries[i + 1] - self.boundaries[i]
    }

    /// Block containing `x`; the right end belongs to the last block.
    pub fn block_of(&self, x: f64) -> usize {
        let p = self.boundaries.partition_point(|&b| b <= x);
        p.saturating_sub(1).min(self.blocks() - 1)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(self.block_of(x), self.block_of(y))
    }

    /// Both graphons on their common refinement.
    fn refine(&self, other: &StepGraphon) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut cuts: Vec<f64> = self.boundaries.iter().chain(&other.boundaries).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let k = cuts.len() - 1;
        let mid: Vec<f64> = cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let ia: Vec<usize> = mid.iter().map(|&x| self.block_of(x)).collect();
        let ib: Vec<usize> = mid.iter().map(|&x| other.block_of(x)).collect();
        let mut a = Vec::with_capacity(k * k);
        let mut b = Vec::with_capacity(k * k);
        for r in 0..k {
            for c in 0..k {
                a.push(self.value(ia[r], ia[c]));
                b.push(other.value(ib[r], ib[c]));
            }
        }
        (cuts, a, b)
    }

    /// `self - other` on the common refinement.
    pub fn difference(&self, other: &StepGraphon) -> StepGraphon {
        let (cuts, a, b) = self.refine(other);
        let values = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        StepGraphon { boundaries: cuts, values }
    }

    /// `∫∫ g` over the unit square.
    pub fn integral(&self) -> f64 {
        let k = self.blocks();
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += self.width(i) * self.width(j) * self.value(i, j);
            }
        }
        s
    }
}

pub(crate) fn equal_boundaries(k: usize) -> Vec<f64> {
    (0..=k).map(|i| if i == k { 1.0 } else { i as f64 / k as f64 }).collect()
}

/// Empirical graphon of a snapshot after the lexicographic relabelling:
/// `n` equal blocks, value 1 on active relabelled pairs.
pub fn from_snapshot(snap: &Snapshot) -> StepGraphon {
    let n = snap.n();
    let p = &snap.permutation;
    let mut values = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..r {
            if snap.graph.contains(p[r], p[c]) {
                values[r * n + c] = 1.0;
                values[c * n + r] = 1.0;
            }
        }
    }
    StepGraphon { boundaries: equal_boundaries(n), values }
}

/// Reference graphon `H(t; F̄(x), F̄(y))` at the centres of a `k × k` grid.
pub fn reference(t: f64, densities: &DensityField, kernel: &EdgeKernel, grid_k: usize) -> Result<StepGraphon> {
    if grid_k == 0 {
        return Err(contract("grid_k must be positive"));
    }
    let q = densities.quantile_map();
    let x: Vec<f64> = (0..grid_k).map(|a| q.eval((a as f64 + 0.5) / grid_k as f64)).collect();
    let mut values = vec![0.0; grid_k * grid_k];
    for a in 0..grid_k {
        for b in 0..=a {
            let v = kernel.eval(t, x[a], x[b]);
            values[a * grid_k + b] = v;
            values[b * grid_k + a] = v;
        }
    }
    StepGraphon::new(equal_boundaries(grid_k), values)
}

/// `∫∫ |a - b|`, exact on the common refinement.
pub fn l1_distance(a: &StepGraphon, b: &StepGraphon) -> f64 {
    let (cuts, va, vb) = a.refine(b);
    let k = cuts.len() - 1;
    let w: Vec<f64> = cuts.windows(2).map(|c| c[1] - c[0]).collect();
    let mut s = 0.0;
    for i in 0..k {
        let mut row = 0.0;
        for j in 0..k {
            row += w[j] * (va[i * k + j] - vb[i * k + j]).abs();
        }
        s += w[i] * row;
    }
    s
}

#[cfg(test)]
mod tests;
