//! Experiments on the layered model.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Result};
use covoter::graphon;
use covoter::pde::solve_model3;
use covoter::stats::polarisation;
use covoter::{DensityField, EdgeKernel, Model3Params, ModelParams, PdeConfig, Simulation};
use rayon::prelude::*;
use serde_json::json;

use super::{graphon_panel, median, model2, snapshots_at, sweep_seeds, Outcome};
use crate::config::Config;
use crate::output;

fn params(cfg: &Config) -> Result<Model3Params> {
    match cfg.model_params()? {
        ModelParams::Model3(p) => Ok(p),
        _ => bail!("this experiment needs model = 3"),
    }
}

fn base() -> Config {
    Config::new()
        .with("model", "3")
        .with("beta", "0.5")
        .with("pi_plus_g", "0.9")
        .with("pi_minus_g", "0.1")
        .with("pi_plus_r", "0.1")
        .with("pi_minus_r", "0.9")
        .with("p0", "0.05")
        .with("init_opinion", "bernoulli:0.5")
        .with("init_y", "uniform")
        .with("n", "150")
        .with("seed", "1")
}

pub fn figure_defaults(q: u32) -> Config {
    base()
        .with("q", &q.to_string())
        .with("times", "2,3,4")
        .with("dt", "0.5")
        .with("cells", "256")
        .with("pixels", "300")
        .with("restarts", "8")
}

pub fn graphons(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let times = cfg.f64_list("times")?;
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    let cells = cfg.usize("cells")?;
    let init = DensityField::point_mass_at_zero(cells, cfg.initial_plus()?)?;
    let traj = solve_model3(&init, &p, &PdeConfig::new(cells, horizon, cfg.f64("dt")?))?;
    let kernel = EdgeKernel::Resulting(p);
    let seed = cfg.seed()?;
    let mut sim = Simulation::new(cfg.process()?, cfg.initial_condition()?, seed)?;
    let snaps = snapshots_at(&mut sim, &times)?;
    let (pixels, restarts) = (cfg.usize("pixels")?, cfg.usize("restarts")?);
    let mut cuts = Vec::new();
    let mut disagree = Vec::new();
    for snap in &snaps {
        let slice = traj.nearest(snap.t);
        if (slice.t - snap.t).abs() > 1e-9 {
            bail!("no density slice at t = {}; choose dt dividing the snapshot times", snap.t);
        }
        let reference = graphon::reference(snap.t, slice, &kernel, snap.n())?;
        cuts.push(graphon_panel(out, "", snap, &reference, pixels, restarts, seed)?);
        disagree.push(polarisation(snap).0);
    }
    let last = *cuts.last().unwrap_or(&f64::NAN);
    Ok(Outcome::below("cut-norm lower bound of empirical - reference at the last time", last, 0.15).with_details(json!({
        "times": times,
        "cut_lower_bounds": cuts,
        "disagree_density": disagree,
    })))
}

pub fn polarisation_defaults() -> Config {
    base().with("T", "4").with("q_values", "1,2,3").with("seeds", "10")
}

/// Median density of disagreeing edges for each `q`.
pub fn disagreement(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let horizon = cfg.f64("T")?;
    let init = cfg.initial_condition()?;
    let zero_rule = cfg.zero_rule()?;
    let seeds = sweep_seeds(cfg)?;
    let q_values = cfg.usize_list("q_values")?;
    let mut medians = Vec::new();
    let mut rows = Vec::new();
    for &q in &q_values {
        let params = Model3Params { q: q as u32, ..p };
        params.validate()?;
        let process = covoter::Process::Model3 { params, zero_rule };
        let runs = seeds
            .par_iter()
            .map(|&seed| -> Result<(u64, f64, f64)> {
                let mut sim = Simulation::new(process.clone(), init, seed)?;
                sim.run_until(horizon)?;
                let (density, share) = polarisation(&sim.snapshot());
                Ok((seed, density, share))
            })
            .collect::<Result<Vec<_>>>()?;
        medians.push(median(runs.iter().map(|r| r.1).collect()));
        rows.extend(runs.into_iter().map(|r| (q, r.0, r.1, r.2)));
    }
    output::write_with(out, "polarisation.csv", |w| {
        writeln!(w, "q,seed,disagree_density,disagree_share")?;
        for r in &rows {
            writeln!(w, "{},{},{},{}", r.0, r.1, r.2, r.3)?;
        }
        Ok(())
    })?;
    let ratio = super::max_successive_ratio(&medians);
    Ok(Outcome::below("max ratio of successive median disagreeing-edge densities along q", ratio, 1.0)
        .with_details(json!({ "q_values": q_values, "median_disagree_density": medians })))
}

pub fn beta_defaults() -> Config {
    base()
        .with("q", "1")
        .with("pi_plus_g", "0.7")
        .with("pi_minus_g", "0.7")
        .with("pi_plus_r", "0.3")
        .with("pi_minus_r", "0.3")
        .with("n", "600")
        .with("times", "3,4,5")
        .with("bins", "20")
}

pub fn beta_panels(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    model2::beta_fixed_point(cfg, out, p.beta)
}
