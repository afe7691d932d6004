use rayon::prelude::*;

use super::StepGraphon;
use crate::error::{Error, Result};
use crate::model::{EntityKind, RngStream};

/// Largest block count accepted by [`cut_norm_exact`].
pub const MAX_EXACT_BLOCKS: usize = 22;

/// Block masses `w_i w_j g_ij`, row-major.
fn masses(g: &StepGraphon) -> (usize, Vec<f64>) {
    let k = g.blocks();
    let mut a = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            a[i * k + j] = g.width(i) * g.width(j) * g.value(i, j);
        }
    }
    (k, a)
}

/// Best `T` for fixed column sums: the larger of the positive and the
/// negative part.
#[inline]
fn best_t(col: &[f64]) -> f64 {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &c in col {
        if c > 0.0 {
            pos += c;
        } else {
            neg -= c;
        }
    }
    pos.max(neg)
}

/// `sup_{S,T} |∫_{S×T} g|`, by enumerating every union of blocks `S` in Gray
/// code order and choosing `T` optimally.
pub fn cut_norm_exact(g: &StepGraphon) -> Result<f64> {
    let (k, a) = masses(g);
    if k > MAX_EXACT_BLOCKS {
        return Err(Error::Budget { blocks: k, max: MAX_EXACT_BLOCKS });
    }
    // split the subsets by their top `hi` bits; each chunk walks the low bits
    let hi = k.min(6);
    let lo = k - hi;
    let best = (0u64..1 << hi)
        .into_par_iter()
        .map(|prefix| {
            let mut col = vec![0.0; k];
            for r in 0..hi {
                if prefix >> r & 1 == 1 {
                    let row = lo + r;
                    for j in 0..k {
                        col[j] += a[row * k + j];
                    }
                }
            }
            let mut best = best_t(&col);
            let mut in_s = vec![false; lo];
            for step in 1u64..1 << lo {
                let r = step.trailing_zeros() as usize;
                let sign = if in_s[r] { -1.0 } else { 1.0 };
                in_s[r] = !in_s[r];
                for j in 0..k {
                    col[j] += sign * a[r * k + j];
                }
                best = best.max(best_t(&col));
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Alternating maximisation from random starting sets (plus `S = [0, 1]`).
/// Always a lower bound on the cut norm.
pub fn cut_norm_lower_bound(g: &StepGraphon, restarts: usize, rng: &RngStream) -> f64 {
    let (k, a) = masses(g);
    let mut best: f64 = 0.0;
    for restart in 0..=restarts {
        for sign in [1.0, -1.0] {
            let mut s: Vec<bool> = if restart == 0 {
                vec![true; k]
            } else {
                (0..k).map(|i| rng.uniform(EntityKind::Aux, restart as u64, i as u64) < 0.5).collect()
            };
            let mut value = f64::NEG_INFINITY;
            loop {
                // best T for S, then best S for T
                let t: Vec<bool> = (0..k)
                    .map(|j| sign * (0..k).filter(|&i| s[i]).map(|i| a[i * k + j]).sum::<f64>() > 0.0)
                    .collect();
                let row: Vec<f64> =
                    (0..k).map(|i| sign * (0..k).filter(|&j| t[j]).map(|j| a[i * k + j]).sum::<f64>()).collect();
                let next: Vec<bool> = row.iter().map(|&r| r > 0.0).collect();
                let v: f64 = row.iter().filter(|&&r| r > 0.0).sum();
                if v <= value + 1e-15 {
                    break;
                }
                value = v;
                s = next;
            }
            best = best.max(value.max(0.0));
        }
    }
    best
}
