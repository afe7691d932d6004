//! Experiments on the two-way feedback model.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Result};
use covoter::graphon;
use covoter::pde::solve_model2;
use covoter::sim::{run_coupled, AlphaField, AlphaSource};
use covoter::stats::{beta_l1, consensus_time, polarisation, type_histogram, Observable, OpinionSample};
use covoter::{
    DensityField, EdgeKernel, LinearKernel, Model2Params, ModelParams, PdeConfig, Process, Simulation, Snapshot,
    Trajectory,
};
use rayon::prelude::*;
use serde_json::json;

use super::{graphon_panel, max_successive_ratio, snapshots_at, sweep_seeds, time_tag, Outcome};
use crate::config::Config;
use crate::output;

fn params(cfg: &Config) -> Result<Model2Params> {
    match cfg.model_params()? {
        ModelParams::Model2(p) => Ok(p),
        _ => bail!("this experiment needs model = 2"),
    }
}

fn base() -> Config {
    Config::new()
        .with("model", "2")
        .with("beta", "0.66")
        .with("pi_plus", "0.9")
        .with("pi_minus", "0.1")
        .with("p0", "0.05")
        .with("init_opinion", "bernoulli:0.5")
        .with("init_y", "uniform")
        .with("seed", "1")
}

fn type_densities(cfg: &Config, p: &Model2Params, horizon: f64, every: f64) -> Result<Trajectory> {
    let cells = cfg.usize("cells")?;
    let init = DensityField::point_mass_at_zero(cells, cfg.initial_plus()?)?;
    Ok(solve_model2(&init, p, &PdeConfig::new(cells, horizon, every))?)
}

fn slice_at(traj: &Trajectory, t: f64) -> Result<&DensityField> {
    let s = traj.nearest(t);
    if (s.t - t).abs() > 1e-9 {
        bail!("no density slice at t = {t}; choose a slice spacing dividing the snapshot times");
    }
    Ok(s)
}

pub fn fig3_defaults() -> Config {
    base().with("n", "100").with("times", "1,2,3").with("dt", "0.5").with("cells", "512").with("pixels", "300").with("restarts", "8")
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
    let fractions: Vec<f64> = snaps.iter().map(Snapshot::frac_plus).collect();
    let pde_fractions: Vec<f64> = times.iter().map(|&t| slice_at(&traj, t).map(DensityField::plus_mass)).collect::<Result<_>>()?;
    let last = *cuts.last().unwrap_or(&f64::NAN);
    Ok(Outcome::below("cut-norm lower bound of empirical - reference at the last time", last, 0.15).with_details(json!({
        "times": times,
        "cut_lower_bounds": cuts,
        "frac_plus": fractions,
        "pde_plus_mass": pde_fractions,
    })))
}

pub fn fig4_defaults() -> Config {
    base()
        .with("n", "100")
        .with("T", "30")
        .with("dt", "0.5")
        .with("seeds", "50")
        .with("eps", "0")
        .with("init_opinion", "balanced")
        .with("times", "6,12,18")
        .with("cells", "512")
        .with("pixels", "300")
}

/// Seed sweep counting runs that reach unanimity, plus the reference
/// graphons at `times`.
pub fn consensus(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let (horizon, dt, eps) = (cfg.f64("T")?, cfg.f64("dt")?, cfg.f64("eps")?);
    let process = cfg.process()?;
    let init = cfg.initial_condition()?;
    let runs = sweep_seeds(cfg)?
        .par_iter()
        .map(|&seed| -> Result<(u64, Option<f64>, Vec<OpinionSample>)> {
            let mut sim = Simulation::new(process.clone(), init, seed)?;
            let mut samples = Vec::new();
            sim.run(horizon, dt, |s| samples.push(OpinionSample { t: s.t(), n_plus: s.n_plus(), n: s.n() }))?;
            Ok((seed, consensus_time(&samples, eps)?, samples))
        })
        .collect::<Result<Vec<_>>>()?;
    output::write_with(out, "consensus.csv", |w| {
        writeln!(w, "seed,consensus_time,final_frac_plus")?;
        for (seed, t, s) in &runs {
            let t = t.map_or(String::new(), |t| t.to_string());
            writeln!(w, "{seed},{t},{}", s.last().map_or(f64::NAN, OpinionSample::frac_plus))?;
        }
        Ok(())
    })?;
    if let Some((_, _, samples)) = runs.first() {
        output::write_with(out, "fraction.csv", |w| covoter::stats::write_fraction_csv(samples, w))?;
    }
    let times = cfg.f64_list("times")?;
    if !times.is_empty() {
        let t_max = times.iter().cloned().fold(0.0, f64::max);
        let traj = type_densities(cfg, &p, t_max, dt)?;
        let kernel = EdgeKernel::Linear(LinearKernel::from(&p));
        let pixels = cfg.usize("pixels")?;
        for &t in &times {
            let g = graphon::reference(t, slice_at(&traj, t)?, &kernel, pixels)?;
            output::write_with(out, &format!("reference_{}.pgm", time_tag(t)), |w| g.write_pgm(pixels, w))?;
        }
    }
    let hits = runs.iter().filter(|r| r.1.is_some()).count();
    let required = (0.9 * runs.len() as f64).ceil();
    Ok(Outcome::at_least("runs reaching consensus by T", hits as f64, required)
        .with_details(json!({ "seeds": runs.len() })))
}

pub fn beta_defaults() -> Config {
    base()
        .with("pi_plus", "0.6")
        .with("pi_minus", "0.6")
        .with("n", "600")
        .with("times", "9")
        .with("bins", "20")
}

pub fn fig5_defaults() -> Config {
    beta_defaults().with("times", "3,6,9")
}

/// Type histograms at `times` against `Beta(beta p, beta (1 - p))` with `p`
/// the measured fraction of `Plus`. Seeds that end in consensus are skipped.
pub fn beta_panels(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    beta_fixed_point(cfg, out, p.beta)
}

/// Shared with the layered model, whose fixed point has the same form.
pub(super) fn beta_fixed_point(cfg: &Config, out: &Path, beta: f64) -> Result<Outcome> {
    const MAX_TRIES: u64 = 20;
    let times = cfg.f64_list("times")?;
    let bins = cfg.usize("bins")?;
    let (process, init, base_seed) = (cfg.process()?, cfg.initial_condition()?, cfg.seed()?);
    for seed in base_seed..base_seed + MAX_TRIES {
        let mut sim = Simulation::new(process.clone(), init, seed)?;
        let snaps = snapshots_at(&mut sim, &times)?;
        let last = snaps.last().expect("at least one time");
        if last.n_plus() == 0 || last.n_plus() == last.n() {
            continue;
        }
        let mut l1 = Vec::new();
        for snap in &snaps {
            let ph = snap.frac_plus();
            let (a, b) = (beta * ph, beta * (1.0 - ph));
            let h = type_histogram(snap, bins, Observable::Y)?;
            output::write_histogram(out, &format!("hist_{}.csv", time_tag(snap.t)), &h, a, b)?;
            l1.push(if a > 0.0 && b > 0.0 { beta_l1(&h, a, b)? } else { f64::NAN });
        }
        let value = *l1.last().expect("at least one time");
        let fracs: Vec<f64> = snaps.iter().map(Snapshot::frac_plus).collect();
        return Ok(Outcome::below("L1 between the y histogram and Beta(beta p, beta (1 - p)) at the last time", value, 0.15)
            .with_details(json!({ "seed": seed, "times": times, "l1": l1, "frac_plus": fracs })));
    }
    bail!("all {MAX_TRIES} seeds from {base_seed} reached consensus")
}

pub fn fig6_defaults() -> Config {
    base()
        .with("pi_plus", "0.9")
        .with("pi_minus", "0.7")
        .with("q_exp", "12")
        .with("n", "100")
        .with("init_opinion", "balanced")
        .with("times", "1,2,3")
        .with("pixels", "300")
}

/// Nonlinear variant next to the linear one on the same clocks; the
/// nonlinear rule should leave fewer disagreeing edges.
pub fn nonlinear(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    let times = cfg.f64_list("times")?;
    let (init, seed, pixels) = (cfg.initial_condition()?, cfg.seed()?, cfg.usize("pixels")?);
    let zero_rule = cfg.zero_rule()?;
    let mut shares = Vec::new();
    for (tag, params) in [("nonlinear_", p), ("linear_", Model2Params { q_exp: 1.0, ..p })] {
        let mut sim = Simulation::new(Process::Model2 { params, zero_rule }, init, seed)?;
        let snaps = snapshots_at(&mut sim, &times)?;
        for snap in &snaps {
            let g = graphon::from_snapshot(snap);
            output::write_with(out, &format!("{tag}empirical_{}.pgm", time_tag(snap.t)), |w| g.write_pgm(pixels, w))?;
        }
        shares.push(snaps.iter().map(|s| polarisation(s).1).collect::<Vec<f64>>());
    }
    let value = *shares[0].last().unwrap_or(&f64::NAN);
    let threshold = *shares[1].last().unwrap_or(&f64::NAN);
    Ok(Outcome::below("share of disagreeing edges at the last time (threshold: linear rule)", value, threshold)
        .with_details(json!({ "times": times, "nonlinear_share": shares[0], "linear_share": shares[1] })))
}

pub fn coupling_defaults() -> Config {
    base()
        .with("T", "3")
        .with("n_values", "100,200,400")
        .with("seeds", "20")
        .with("cells", "512")
        .with("dt", "0.05")
        .with("init_y", "const:0")
}

/// Model 2 and its mimicking process on shared clocks, for growing `n`.
pub fn coupling(cfg: &Config, out: &Path) -> Result<Outcome> {
    let p = params(cfg)?;
    if !p.is_linear() {
        bail!("the mimicking process needs the linear rule (q_exp = 1)");
    }
    let (horizon, dt) = (cfg.f64("T")?, cfg.f64("dt")?);
    let traj = type_densities(cfg, &p, horizon, dt)?;
    let field = Arc::new(AlphaField::new(traj.slices, EdgeKernel::Linear(LinearKernel::from(&p)))?);
    let process = cfg.process()?;
    let mimic = Process::Mimic2 { params: p, alpha: AlphaSource::Field(field) };
    let seeds = sweep_seeds(cfg)?;
    let n_values = cfg.usize_list("n_values")?;
    let (mut mean_v, mut mean_e) = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for &n in &n_values {
        let mut c = cfg.clone();
        c.set("n", &n.to_string())?;
        let init = c.initial_condition()?;
        let traces = seeds
            .par_iter()
            .map(|&seed| {
                let mut a = Simulation::new(process.clone(), init, seed)?;
                let mut b = Simulation::new(mimic.clone(), init, seed)?;
                Ok((seed, run_coupled(&mut a, &mut b, horizon, dt)?))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some((_, trace)) = traces.first() {
            output::write_with(out, &format!("coupling_n{n}.csv"), |w| trace.write_csv(w))?;
        }
        let nf = n as f64;
        let finals: Vec<(u64, f64, f64)> = traces
            .iter()
            .map(|(s, t)| (*s, *t.d_v.last().unwrap_or(&0) as f64 / nf, *t.d_e.last().unwrap_or(&0) as f64 / (nf * nf)))
            .collect();
        let k = finals.len() as f64;
        mean_v.push(finals.iter().map(|r| r.1).sum::<f64>() / k);
        mean_e.push(finals.iter().map(|r| r.2).sum::<f64>() / k);
        rows.extend(finals.into_iter().map(|r| (n, r.0, r.1, r.2)));
    }
    output::write_with(out, "coupling.csv", |w| {
        writeln!(w, "n,seed,d_v_over_n,d_e_over_n2")?;
        for r in &rows {
            writeln!(w, "{},{},{},{}", r.0, r.1, r.2, r.3)?;
        }
        Ok(())
    })?;
    let ratio = max_successive_ratio(&mean_v).max(max_successive_ratio(&mean_e));
    Ok(Outcome::below("max ratio of successive means (d_V/n and d_E/n^2) along n", ratio, 1.0)
        .with_details(json!({ "n_values": n_values, "mean_d_v_over_n": mean_v, "mean_d_e_over_n2": mean_e })))
}
