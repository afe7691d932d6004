//! Preregistered experiments. Each has default settings, accepts overrides
//! and writes its artifacts plus `verdict.json` into its output directory.

mod checks;
mod model1;
mod model2;
mod model3;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use covoter::graphon::{self, cut_norm_lower_bound, StepGraphon};
use covoter::{RngStream, Simulation, Snapshot};
use serde::Serialize;

use crate::config::Config;
use crate::output;

/// Result of one experiment run, as written to `verdict.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub config: BTreeMap<String, String>,
    pub metric: String,
    /// Non-finite values serialize as `null`.
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub details: serde_json::Value,
}

/// What an experiment body reports.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: Option<String>,
    pub details: serde_json::Value,
}

impl Outcome {
    /// Passes when `value < threshold`.
    pub fn below(metric: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            metric: metric.into(),
            value,
            threshold,
            pass: value < threshold,
            note: None,
            details: serde_json::Value::Null,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(metric: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { pass: value >= threshold, ..Self::below(metric, value, threshold) }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    defaults: fn() -> Config,
    body: fn(&Config, &Path) -> Result<Outcome>,
}

impl Experiment {
    pub fn defaults(&self) -> Config {
        (self.defaults)().with("experiment", self.name)
    }
}

pub static REGISTRY: &[Experiment] = &[
    Experiment { name: "fig1", about: "model 1 empirical and reference graphons", defaults: model1::fig1_defaults, body: model1::graphons },
    Experiment { name: "fig2", about: "model 1 type histograms on a rate grid", defaults: model1::fig2_defaults, body: model1::beta_panels },
    Experiment { name: "fig3", about: "model 2 empirical and reference graphons", defaults: model2::fig3_defaults, body: model2::graphons },
    Experiment { name: "fig4", about: "model 2 consensus over a seed sweep", defaults: model2::fig4_defaults, body: model2::consensus },
    Experiment { name: "fig5", about: "model 2 type histograms at three times", defaults: model2::fig5_defaults, body: model2::beta_panels },
    Experiment { name: "fig6", about: "nonlinear model 2 graphons", defaults: model2::fig6_defaults, body: model2::nonlinear },
    Experiment { name: "fig7", about: "model 3 graphons, q = 1", defaults: || model3::figure_defaults(1), body: model3::graphons },
    Experiment { name: "fig8", about: "model 3 graphons, q = 2", defaults: || model3::figure_defaults(2), body: model3::graphons },
    Experiment { name: "fig9", about: "model 3 graphons, q = 3", defaults: || model3::figure_defaults(3), body: model3::graphons },
    Experiment { name: "coupling", about: "model 2 against its mimicking process", defaults: model2::coupling_defaults, body: model2::coupling },
    Experiment { name: "beta-m1", about: "model 1 Beta limit of the types", defaults: model1::beta_defaults, body: model1::beta_panels },
    Experiment { name: "beta-m2", about: "model 2 Beta fixed point", defaults: model2::beta_defaults, body: model2::beta_panels },
    Experiment { name: "beta-m3", about: "model 3 Beta fixed point", defaults: model3::beta_defaults, body: model3::beta_panels },
    Experiment { name: "expm-check", about: "closed-form matrix exponential", defaults: checks::expm_defaults, body: checks::expm },
    Experiment { name: "stationary-check", about: "PDE drift from the stationary densities", defaults: checks::stationary_defaults, body: checks::stationary },
    Experiment { name: "cutnorm-check", about: "exact cut norm against double enumeration", defaults: checks::cutnorm_defaults, body: checks::cutnorm },
    Experiment { name: "m1-fraction", about: "model 1 stationary opinion fraction", defaults: model1::fraction_defaults, body: model1::fraction },
    Experiment { name: "lln", about: "graphon law of large numbers for model 1", defaults: model1::lln_defaults, body: model1::lln },
    Experiment { name: "polarisation", about: "model 3 disagreeing edges against q", defaults: model3::polarisation_defaults, body: model3::disagreement },
    Experiment { name: "series-check", about: "series recursion against the Beta form", defaults: checks::series_defaults, body: checks::series },
    Experiment { name: "kernel-check", about: "resulting-graph kernel extremes", defaults: checks::kernel_defaults, body: checks::kernel },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

pub fn registry_listing() -> String {
    REGISTRY.iter().map(|e| format!("  {:<18}{}\n", e.name, e.about)).collect()
}

/// Runs `name` with `overrides` on top of its defaults and writes
/// `verdict.json` and `config.txt` into `out`.
pub fn run(name: &str, overrides: &Config, out: &Path) -> Result<Verdict> {
    let Some(exp) = find(name) else {
        bail!("unknown experiment `{name}`; registered experiments:\n{}", registry_listing());
    };
    let cfg = exp.defaults().merged(overrides).with("experiment", name);
    cfg.check_model_keys()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.txt"), cfg.serialize())?;
    let start = Instant::now();
    let o = (exp.body)(&cfg, out).with_context(|| format!("experiment `{name}`"))?;
    let verdict = Verdict {
        name: name.to_string(),
        config: cfg.to_map(),
        metric: o.metric,
        value: o.value,
        threshold: o.threshold,
        pass: o.pass,
        runtime_s: start.elapsed().as_secs_f64(),
        note: o.note,
        details: o.details,
    };
    output::write_json(out, "verdict.json", &verdict)?;
    Ok(verdict)
}

/// Snapshots at each of `times`, in increasing order.
fn snapshots_at(sim: &mut Simulation, times: &[f64]) -> Result<Vec<Snapshot>> {
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        sim.run_until(t)?;
        out.push(sim.snapshot());
    }
    Ok(out)
}

/// Seeds `base, base + 1, ...` of a sweep.
fn sweep_seeds(cfg: &Config) -> Result<Vec<u64>> {
    let base = cfg.seed()?;
    Ok((0..cfg.usize("seeds")? as u64).map(|k| base + k).collect())
}

/// Largest ratio of consecutive entries; below 1 iff strictly decreasing.
fn max_successive_ratio(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn time_tag(t: f64) -> String {
    format!("T{t}")
}

/// Writes the empirical and reference panels of one time and returns the
/// cut-norm lower bound of their difference.
fn graphon_panel(
    out: &Path,
    prefix: &str,
    snap: &Snapshot,
    reference: &StepGraphon,
    pixels: usize,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    let empirical = graphon::from_snapshot(snap);
    let tag = time_tag(snap.t);
    output::write_with(out, &format!("{prefix}empirical_{tag}.pgm"), |w| empirical.write_pgm(pixels, w))?;
    output::write_with(out, &format!("{prefix}reference_{tag}.pgm"), |w| reference.write_pgm(pixels, w))?;
    output::write_with(out, &format!("{prefix}empirical_{tag}.csv"), |w| empirical.write_csv(w))?;
    Ok(cut_norm_lower_bound(&empirical.difference(reference), restarts, &RngStream::new(seed)))
}
