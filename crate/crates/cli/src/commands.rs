//! Subcommand bodies. Each takes a validated configuration and an output
//! directory.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use covoter::graphon::{self, cut_norm_exact, cut_norm_lower_bound, l1_distance, MAX_EXACT_BLOCKS};
use covoter::pde::{solve_model1, solve_model2, solve_model3, stationary_model1, stationary_model2, stationary_residual};
use covoter::stats::{beta_l1, polarisation, type_histogram, Observable};
use covoter::{DensityField, ModelParams, PdeConfig, RngStream, Simulation, StepGraphon, YLaw};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::experiments::{self, Verdict};
use crate::output;

fn usize_or(cfg: &Config, key: &str, default: usize) -> Result<usize> {
    if cfg.contains(key) {
        cfg.usize(key)
    } else {
        Ok(default)
    }
}

/// Beta shapes the `y` histogram is compared with, if the model has one.
fn beta_shapes(params: &ModelParams, frac_plus: f64) -> (f64, f64) {
    match params {
        ModelParams::Model1(p) => (p.gamma_mp, p.gamma_pm),
        ModelParams::Model2(p) => (p.beta * frac_plus, p.beta * (1.0 - frac_plus)),
        ModelParams::Model3(p) => (p.beta * frac_plus, p.beta * (1.0 - frac_plus)),
    }
}

/// Runs one simulation and writes `trajectory.csv`, `vertices.csv`,
/// `graphon.pgm`, `graphon.csv`, `histogram.csv` and `summary.json`; model 3
/// adds `layers.csv`.
pub fn simulate(cfg: &Config, out: &Path) -> Result<()> {
    cfg.validate_run()?;
    let params = cfg.model_params()?;
    let mut sim = Simulation::new(cfg.process()?, cfg.initial_condition()?, cfg.seed()?)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut rows = Vec::new();
    sim.run(cfg.f64("T")?, cfg.f64("dt")?, |s| {
        let g = s.graph();
        let disagree = g.edges().filter(|&(i, j)| s.opinion(i) != s.opinion(j)).count();
        rows.push((s.t(), s.n_plus(), g.count(), disagree));
    })?;
    let n = sim.n();
    output::write_with(out, "trajectory.csv", |w| {
        writeln!(w, "t,n_plus,frac_plus,active_edges,disagree_edges")?;
        for (t, k, e, d) in &rows {
            writeln!(w, "{t},{k},{},{e},{d}", *k as f64 / n as f64)?;
        }
        Ok(())
    })?;
    let snap = sim.snapshot();
    output::write_with(out, "vertices.csv", |w| snap.write_vertices_csv(w))?;
    let g = graphon::from_snapshot(&snap);
    let pixels = usize_or(cfg, "pixels", n)?;
    output::write_with(out, "graphon.pgm", |w| g.write_pgm(pixels, w))?;
    output::write_with(out, "graphon.csv", |w| g.write_csv(w))?;
    let h = type_histogram(&snap, usize_or(cfg, "bins", 40)?, Observable::Y)?;
    let (a, b) = beta_shapes(&params, snap.frac_plus());
    output::write_histogram(out, "histogram.csv", &h, a, b)?;
    if let ModelParams::Model3(p) = params {
        let q = p.q as usize;
        output::write_with(out, "layers.csv", |w| {
            writeln!(w, "layer,colour,active_edges,density")?;
            for (l, layer) in sim.layers().iter().enumerate() {
                let colour = if l < q { "g" } else { "r" };
                writeln!(w, "{l},{colour},{},{}", layer.count(), layer.density())?;
            }
            Ok(())
        })?;
    }
    let (density, share) = polarisation(&snap);
    let beta_distance = if a > 0.0 && b > 0.0 { Some(beta_l1(&h, a, b)?) } else { None };
    output::write_json(
        out,
        "summary.json",
        &json!({
            "t": snap.t,
            "n": n,
            "n_plus": snap.n_plus(),
            "frac_plus": snap.frac_plus(),
            "active_edges": snap.graph.count(),
            "disagree_density": density,
            "disagree_share": share,
            "vertex_events": sim.vertex_events(),
            "edge_events": sim.edge_events(),
            "beta_shapes": [a, b],
            "beta_l1": beta_distance,
        }),
    )?;
    Ok(())
}

/// Solves the density equations and writes `density.csv` and
/// `residuals.csv` (mass, minimum and distance to the fixed point per slice).
pub fn pde(cfg: &Config, out: &Path) -> Result<()> {
    let params = cfg.model_params()?;
    let cells = usize_or(cfg, "cells", 256)?;
    let horizon = cfg.f64("T")?;
    let mut pde = PdeConfig::new(cells, horizon, cfg.f64("dt")?);
    if cfg.contains("pde_dt") {
        pde.dt = Some(cfg.f64("pde_dt")?);
    }
    let p_plus = cfg.initial_plus()?;
    let init = match cfg.y_law()? {
        YLaw::Uniform => DensityField::uniform(cells, p_plus)?,
        YLaw::Constant(y) if y == 0.0 => DensityField::point_mass_at_zero(cells, p_plus)?,
        YLaw::Constant(y) => bail!("key `init_y` = const:{y}: the density solver supports uniform or const:0"),
    };
    let traj = match params {
        ModelParams::Model1(p) => solve_model1(&init, &p, &pde)?,
        ModelParams::Model2(p) => solve_model2(&init, &p, &pde)?,
        ModelParams::Model3(p) => solve_model3(&init, &p, &pde)?,
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    output::write_with(out, "density.csv", |w| traj.write_csv(w))?;
    let fixed_point = |s: &DensityField| -> Result<Option<DensityField>> {
        Ok(match params {
            ModelParams::Model1(p) => Some(stationary_model1(&p, cells)?),
            ModelParams::Model2(p) if p.is_linear() && p.pi_plus == p.pi_minus => {
                let m = s.plus_mass();
                if m > 0.0 && m < 1.0 {
                    Some(stationary_model2(p.beta, m, cells)?)
                } else {
                    None
                }
            }
            _ => None,
        })
    };
    let mut rows = Vec::new();
    for s in &traj.slices {
        let distance = match fixed_point(s)? {
            Some(f) => Some(s.l1_distance(&f)?),
            None => None,
        };
        let residual = match params {
            ModelParams::Model1(p) => Some(stationary_residual(s, &p)),
            _ => None,
        };
        rows.push((s.t, s.mass(), s.plus_mass(), s.min_value(), distance, residual));
    }
    let show = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    output::write_with(out, "residuals.csv", |w| {
        writeln!(w, "t,mass,plus_mass,min_value,fixed_point_l1,stationary_residual")?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{},{}", r.0, r.1, r.2, r.3, show(r.4), show(r.5))?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphonDistances {
    pub l1: f64,
    pub cut: f64,
    /// `exact` or `lower_bound`.
    pub cut_method: &'static str,
    pub blocks: usize,
}

fn read_graphon(cfg: &Config, key: &str) -> Result<StepGraphon> {
    let path = PathBuf::from(cfg.text(key).ok_or_else(|| anyhow!("missing key `{key}`"))?);
    let file = fs::File::open(&path).with_context(|| format!("key `{key}`: opening {}", path.display()))?;
    StepGraphon::read_csv(BufReader::new(file)).with_context(|| format!("key `{key}`: reading {}", path.display()))
}

/// Distances between the graphons stored at `graphon_a` and `graphon_b`;
/// writes `distances.json`.
pub fn graphon(cfg: &Config, out: &Path) -> Result<GraphonDistances> {
    let a = read_graphon(cfg, "graphon_a")?;
    let b = read_graphon(cfg, "graphon_b")?;
    let d = a.difference(&b);
    let (cut, cut_method) = if d.blocks() <= MAX_EXACT_BLOCKS {
        (cut_norm_exact(&d)?, "exact")
    } else {
        let seed = if cfg.contains("seed") { cfg.seed()? } else { 0 };
        (cut_norm_lower_bound(&d, usize_or(cfg, "restarts", 16)?, &RngStream::new(seed)), "lower_bound")
    };
    let result = GraphonDistances { l1: l1_distance(&a, &b), cut, cut_method, blocks: d.blocks() };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    output::write_json(out, "distances.json", &result)?;
    Ok(result)
}

/// Runs a registered experiment with `overrides`.
pub fn experiment(name: &str, overrides: &Config, out: &Path) -> Result<Verdict> {
    experiments::run(name, overrides, out)
}
