//! Observables comparing simulations with the limiting theory.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{contract, Result};
use crate::graph::pair_count;
use crate::sim::Snapshot;

/// Equal-width histogram on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub total: usize,
}

impl Histogram {
    /// Bins values from `[0, 1]`; 1 falls in the last bin, values outside are
    /// clamped into the end bins.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(contract("need at least one bin"));
        }
        let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let b = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Self { edges, counts, total: values.len() })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Fraction of the values in each bin.
    pub fn masses(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    /// Rows `bin_left,bin_right,mass,beta_mass`.
    pub fn write_csv(&self, a: f64, b: f64, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "bin_left,bin_right,mass,beta_mass")?;
        let beta = beta_bin_masses(&self.edges, a, b);
        for (k, m) in self.masses().iter().enumerate() {
            writeln!(w, "{},{},{},{}", self.edges[k], self.edges[k + 1], m, beta[k])?;
        }
        Ok(())
    }
}

/// Which per-vertex value to histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Y,
    Type,
}

pub fn type_histogram(snap: &Snapshot, bins: usize, observable: Observable) -> Result<Histogram> {
    match observable {
        Observable::Y => Histogram::from_values(&snap.y, bins),
        Observable::Type => Histogram::from_values(&snap.types, bins),
    }
}

fn beta_bin_masses(edges: &[f64], a: f64, b: f64) -> Vec<f64> {
    let cdf = |x: f64| beta_reg(a, b, x.clamp(0.0, 1.0));
    edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])).collect()
}

/// `sum_bins |empirical mass - Beta(a, b) mass|`.
pub fn beta_l1(h: &Histogram, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(contract(format!("Beta shapes ({a}, {b}) must be positive")));
    }
    if h.total == 0 {
        return Err(contract("empty histogram"));
    }
    let beta = beta_bin_masses(&h.edges, a, b);
    Ok(h.masses().iter().zip(&beta).map(|(m, b)| (m - b).abs()).sum())
}

/// Opinion count at one observation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpinionSample {
    pub t: f64,
    pub n_plus: usize,
    pub n: usize,
}

impl OpinionSample {
    pub fn of(snap: &Snapshot) -> Self {
        Self { t: snap.t, n_plus: snap.n_plus(), n: snap.n() }
    }

    pub fn frac_plus(&self) -> f64 {
        self.n_plus as f64 / self.n as f64
    }
}

/// Rows `t,frac_plus`.
pub fn write_fraction_csv(samples: &[OpinionSample], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "t,frac_plus")?;
    for s in samples {
        writeln!(w, "{},{}", s.t, s.frac_plus())?;
    }
    Ok(())
}

/// First sampled time at which the minority fraction is at most `eps`.
pub fn consensus_time(trajectory: &[OpinionSample], eps: f64) -> Result<Option<f64>> {
    if !(0.0..0.5).contains(&eps) {
        return Err(contract(format!("eps = {eps} must lie in [0, 0.5)")));
    }
    Ok(trajectory
        .iter()
        .find(|s| (s.n_plus.min(s.n - s.n_plus) as f64) <= eps * s.n as f64)
        .map(|s| s.t))
}

/// Active edges joining opposite opinions, as a fraction of all pairs and
/// as a fraction of active edges.
pub fn polarisation(snap: &Snapshot) -> (f64, f64) {
    let active = snap.graph.count();
    let disagree = snap.graph.edges().filter(|&(i, j)| snap.opinions[i] != snap.opinions[j]).count();
    let pairs = pair_count(snap.n());
    let density = if pairs == 0 { 0.0 } else { disagree as f64 / pairs as f64 };
    let share = if active == 0 { 0.0 } else { disagree as f64 / active as f64 };
    (density, share)
}

#[cfg(test)]
mod tests {
    use statrs::distribution::{Beta, ContinuousCDF};

    use super::*;
    use crate::graph::EdgeSet;
    use crate::model::{EntityKind, Opinion, RngStream};

    fn snapshot(opinions: Vec<Opinion>, y: Vec<f64>, graph: EdgeSet) -> Snapshot {
        let n = opinions.len();
        Snapshot::new(5.0, opinions, y, vec![0.0; n], graph, Vec::new())
    }

    #[test]
    fn histogram_examples() {
        let h = Histogram::from_values(&[0.0; 10], 4).unwrap();
        assert_eq!(h.counts, vec![10, 0, 0, 0]);
        let centres: Vec<f64> = (0..8).map(|k| (k as f64 + 0.5) / 8.0).collect();
        let h = Histogram::from_values(&centres, 8).unwrap();
        assert!(h.counts.iter().all(|&c| c == 1));
        assert_eq!(Histogram::from_values(&[1.0], 3).unwrap().counts, vec![0, 0, 1]);
        assert!(Histogram::from_values(&[0.5], 0).is_err());
    }

    #[test]
    fn masses_sum_to_one() {
        let r = RngStream::new(4);
        let v: Vec<f64> = (0..777).map(|k| r.uniform(EntityKind::Aux, 0, k)).collect();
        let h = Histogram::from_values(&v, 13).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), h.total);
        assert!((h.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_y_gives_flat_histogram() {
        let r = RngStream::new(5);
        let n = 6000;
        let y: Vec<f64> = (0..n).map(|k| r.uniform(EntityKind::InitY, k, 0)).collect();
        let s = snapshot(vec![Opinion::Plus; n as usize], y, EdgeSet::empty(n as usize));
        let h = type_histogram(&s, 20, Observable::Y).unwrap();
        let e = n as f64 / 20.0;
        let chi2: f64 = h.counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 19 degrees of freedom: mean 19, sd sqrt(38)
        assert!(chi2 < 19.0 + 3.0 * 38f64.sqrt(), "{chi2}");
    }

    #[test]
    fn beta_l1_examples() {
        let centres: Vec<f64> = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).collect();
        let h = Histogram::from_values(&centres, 10).unwrap();
        assert!(beta_l1(&h, 1.0, 1.0).unwrap() < 1e-12);
        assert!(beta_l1(&h, 0.0, 1.0).is_err());

        // inverse-CDF sampling from Beta(2, 3)
        let dist = Beta::new(2.0, 3.0).unwrap();
        let r = RngStream::new(6);
        let v: Vec<f64> = (0..100_000).map(|k| dist.inverse_cdf(r.uniform(EntityKind::Aux, 0, k))).collect();
        let h = Histogram::from_values(&v, 40).unwrap();
        let d = beta_l1(&h, 2.0, 3.0).unwrap();
        assert!(d < 0.05, "{d}");
        assert!(beta_l1(&h, 3.0, 2.0).unwrap() > 0.2);
    }

    #[test]
    fn consensus_examples() {
        let traj = [
            OpinionSample { t: 0.0, n_plus: 50, n: 100 },
            OpinionSample { t: 1.0, n_plus: 96, n: 100 },
            OpinionSample { t: 2.0, n_plus: 100, n: 100 },
        ];
        assert_eq!(consensus_time(&traj, 0.0).unwrap(), Some(2.0));
        assert_eq!(consensus_time(&traj, 0.05).unwrap(), Some(1.0));
        assert_eq!(consensus_time(&traj[..2], 0.0).unwrap(), None);
        assert_eq!(consensus_time(&[OpinionSample { t: 0.0, n_plus: 10, n: 10 }], 0.0).unwrap(), Some(0.0));
        assert!(consensus_time(&traj, 0.5).is_err());
    }

    #[test]
    fn polarisation_examples() {
        let n = 10;
        let s = snapshot(vec![Opinion::Plus; n], vec![0.5; n], EdgeSet::complete(n));
        assert_eq!(polarisation(&s), (0.0, 0.0));
        let opinions = (0..n).map(|i| if i < n / 2 { Opinion::Plus } else { Opinion::Minus }).collect();
        let s = snapshot(opinions, vec![0.5; n], EdgeSet::complete(n));
        let (density, share) = polarisation(&s);
        let expected = 25.0 / 45.0;
        assert!((density - expected).abs() < 1e-15 && (share - expected).abs() < 1e-15);
        let empty = snapshot(vec![Opinion::Plus, Opinion::Minus], vec![0.5; 2], EdgeSet::empty(2));
        assert_eq!(polarisation(&empty), (0.0, 0.0));
    }
}
