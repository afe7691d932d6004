//! Experiments on the one-way feedback model.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Result};
use covoter::graphon::{self, cut_norm_lower_bound, l1_distance};
use covoter::pde::solve_model1;
use covoter::stats::{beta_l1, type_histogram, Observable};
use covoter::{
    DensityField, EdgeKernel, LinearKernel, Model1Params, ModelParams, PdeConfig, Process, RngStream, Simulation,
    Trajectory,
};
use rayon::prelude::*;
use serde_json::json;

use super::{graphon_panel, max_successive_ratio, snapshots_at, sweep_seeds, Outcome};
use crate::config::Config;
use crate::output;

fn params(cfg: &Config) -> Result<Model1Params> {
    match cfg.model_params()? {
        ModelParams::Model1(p) => Ok(p),
        _ => bail!("this experiment needs model = 1"),
    }
}

/// Paper setting of the model-1 examples.
fn base() -> Config {
    Config::new()
        .with("model", "1")
        .with("gamma_mp", "1")
        .with("gamma_pm", "1.5")
        .with("pi_plus", "0.9")
        .with("pi_minus", "0.1")
        .with("p0", "0.05")
        .with("init_opinion", "all_plus")
        .with("init_y", "uniform")
        .with("seed", "1")
}

/// Density of the types started from every vertex at type 0.
fn type_densities(cfg: &Config, p: &Model1Params, horizon: f64, every: f64) -> Result<Trajectory> {
    let cells = cfg.usize("cells")?;
    let init = DensityField::point_mass_at_zero(cells, cfg.initial_plus()?)?;
    Ok(solve_model1(&init, p, &PdeConfig::new(cells, horizon, every))?)
}

fn slice_at(traj: &Trajectory, t: f64) -> Result<&DensityField> {
    let s = traj.nearest(t);
    if (s.t - t).abs() > 1e-9 {
        bail!("no density slice at t = {t}; choose a slice spacing dividing the snapshot times");
    }
    Ok(s)
}

pub fn fig1_defaults() -> Config {
    base().with("n", "100").with("times", "0.5,1,1.5").with("dt", "0.5").with("cells", "512").with("pixels", "300").with("restarts", "8")
}

pub fn graphons(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let times = cfg.f64_list("times")?;
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    let traj = type_densities(cfg, &p, horizon, cfg.f64("dt")?)?;
    let kernel = EdgeKernel::Linear(LinearKernel::from(&p));
    let seed = cfg.seed()?;
    let mut sim = Simulation::new(cfg.process()?, cfg.initial_condition()?, seed)?;
    let snaps = snapshots_at(&mut sim, &times)?;
    let (pixels, restarts) = (cfg.usize("pixels")?, cfg.usize("restarts")?);
    let mut cuts = Vec::new();
    for snap in &snaps {
        let reference = graphon::reference(snap.t, slice_at(&traj, snap.t)?, &kernel, snap.n())?;
        cuts.push(graphon_panel(out, "", snap, &reference, pixels, restarts, seed)?);
    }
    let last = *cuts.last().unwrap_or(&f64::NAN);
    Ok(Outcome::below("cut-norm lower bound of empirical - reference at the last time", last, 0.15)
        .with_details(json!({ "times": times, "cut_lower_bounds": cuts })))
}

pub fn beta_defaults() -> Config {
    base()
        .with("n", "6000")
        .with("T", "50")
        .with("gamma_pairs", "1,1.5,2,3,0.5,0.5")
        .with("bins", "40")
        .with("vertex_only", "true")
}

pub fn fig2_defaults() -> Config {
    beta_defaults().with("gammas", "0.5,1,1.5")
}

/// Histograms of `y` against `Beta(gamma_mp, gamma_pm)`, one per rate pair.
/// `gammas` (crossed with itself) takes precedence over `gamma_pairs`.
pub fn beta_panels(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let pairs: Vec<(f64, f64)> = if cfg.contains("gammas") {
        let g = cfg.f64_list("gammas")?;
        g.iter().flat_map(|&a| g.iter().map(move |&b| (a, b))).collect()
    } else {
        let flat = cfg.f64_list("gamma_pairs")?;
        if flat.len() % 2 != 0 {
            bail!("key `gamma_pairs` needs an even number of entries");
        }
        flat.chunks(2).map(|c| (c[0], c[1])).collect()
    };
    let (horizon, bins, seed) = (cfg.f64("T")?, cfg.usize("bins")?, cfg.seed()?);
    let init = cfg.initial_condition()?;
    let vertex_only = cfg.bool_or("vertex_only", false);
    let results = pairs
        .par_iter()
        .map(|&(gmp, gpm)| -> Result<(f64, f64, f64)> {
            let params = Model1Params { gamma_mp: gmp, gamma_pm: gpm, ..p };
            let mut sim = Simulation::new(Process::Model1 { params, vertex_only }, init, seed)?;
            sim.run_until(horizon)?;
            let h = type_histogram(&sim.snapshot(), bins, Observable::Y)?;
            output::write_histogram(out, &format!("hist_gmp{gmp}_gpm{gpm}.csv"), &h, gmp, gpm)?;
            Ok((gmp, gpm, beta_l1(&h, gmp, gpm)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let rows: Vec<_> = results.iter().map(|r| json!({ "gamma_mp": r.0, "gamma_pm": r.1, "l1": r.2 })).collect();
    Ok(Outcome::below("max L1 between the y histogram and Beta(gamma_mp, gamma_pm)", worst, 0.1)
        .with_details(json!(rows)))
}

pub fn fraction_defaults() -> Config {
    base().with("n", "5000").with("T", "20").with("dt", "0.5").with("vertex_only", "true")
}

pub fn fraction(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let mut sim = Simulation::new(cfg.process()?, cfg.initial_condition()?, cfg.seed()?)?;
    let mut rows = Vec::new();
    sim.run(cfg.f64("T")?, cfg.f64("dt")?, |s| rows.push((s.t(), s.n_plus())))?;
    let n = sim.n() as f64;
    output::write_with(out, "fraction.csv", |w| {
        writeln!(w, "t,frac_plus")?;
        for (t, k) in &rows {
            writeln!(w, "{t},{}", *k as f64 / n)?;
        }
        Ok(())
    })?;
    let frac = sim.n_plus() as f64 / n;
    let target = p.stationary_plus();
    Ok(Outcome::below("|N_+(T)/n - gamma_mp/(gamma_pm + gamma_mp)|", (frac - target).abs(), 0.03)
        .with_details(json!({ "fraction": frac, "stationary": target })))
}

pub fn lln_defaults() -> Config {
    base()
        .with("T", "1.5")
        .with("n_values", "50,200,800")
        .with("seeds", "10")
        .with("cells", "512")
        .with("restarts", "8")
}

pub fn lln(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let horizon = cfg.f64("T")?;
    let traj = type_densities(cfg, &p, horizon, horizon.max(1e-3))?;
    let kernel = EdgeKernel::Linear(LinearKernel::from(&p));
    let restarts = cfg.usize("restarts")?;
    let process = cfg.process()?;
    let seeds = sweep_seeds(cfg)?;
    let mut rows = Vec::new();
    let (mut mean_l1, mut mean_cut) = (Vec::new(), Vec::new());
    for n in cfg.usize_list("n_values")? {
        let mut c = cfg.clone();
        c.set("n", &n.to_string())?;
        let init = c.initial_condition()?;
        let reference = graphon::reference(horizon, slice_at(&traj, horizon)?, &kernel, n)?;
        let per_seed = seeds
            .par_iter()
            .map(|&seed| -> Result<(u64, f64, f64)> {
                let mut sim = Simulation::new(process.clone(), init, seed)?;
                sim.run_until(horizon)?;
                let empirical = graphon::from_snapshot(&sim.snapshot());
                let l1 = l1_distance(&empirical, &reference);
                let cut = cut_norm_lower_bound(&empirical.difference(&reference), restarts, &RngStream::new(seed));
                Ok((seed, l1, cut))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = per_seed.len() as f64;
        mean_l1.push(per_seed.iter().map(|r| r.1).sum::<f64>() / k);
        mean_cut.push(per_seed.iter().map(|r| r.2).sum::<f64>() / k);
        rows.extend(per_seed.into_iter().map(|r| (n, r.0, r.1, r.2)));
    }
    output::write_with(out, "lln.csv", |w| {
        writeln!(w, "n,seed,l1,cut_lower_bound")?;
        for r in &rows {
            writeln!(w, "{},{},{},{}", r.0, r.1, r.2, r.3)?;
        }
        Ok(())
    })?;
    let ratio = max_successive_ratio(&mean_l1).max(max_successive_ratio(&mean_cut));
    Ok(Outcome::below("max ratio of successive means (L1 and cut lower bound) along n", ratio, 1.0)
        .with_details(json!({
            "n_values": cfg.usize_list("n_values")?,
            "mean_l1": mean_l1,
            "mean_cut_lower_bound": mean_cut,
            "horizon": horizon,
        })))
}
