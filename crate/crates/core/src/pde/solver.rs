use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DensityField, EdgeKernel, LinearKernel, Model1Params, Model2Params, Model3Params, DEGENERATE_DENOMINATOR};

/// Grid and time-stepping settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    /// Number of grid cells `M`; the grid has `M + 1` nodes.
    pub cells: usize,
    /// Time step. `None` picks `0.4 / M`.
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Spacing of the returned slices.
    pub output_every: f64,
}

impl PdeConfig {
    pub fn new(cells: usize, horizon: f64, output_every: f64) -> Self {
        Self { cells, dt: None, horizon, output_every }
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(0.4 / self.cells as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 2 {
            return Err(Error::Config(format!("cells = {} must be at least 2", self.cells)));
        }
        let dt = self.time_step();
        if !(dt > 0.0) || dt > 1.0 / self.cells as f64 {
            return Err(Error::Config(format!(
                "dt = {dt} violates the CFL bound dt <= 1/M = {}",
                1.0 / self.cells as f64
            )));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon = {} must be finite and nonnegative", self.horizon)));
        }
        if !(self.output_every > 0.0) {
            return Err(Error::Config(format!("output_every = {} must be positive", self.output_every)));
        }
        Ok(())
    }
}

/// Density slices at increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub slices: Vec<DensityField>,
}

impl Trajectory {
    pub fn last(&self) -> &DensityField {
        self.slices.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    /// Slice whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> &DensityField {
        self.slices
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory is never empty")
    }

    /// Rows `t,u,f_plus,f_minus`, slice by slice, nodes in increasing `u`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,u,f_plus,f_minus")?;
        for s in &self.slices {
            for i in 0..=s.cells() {
                writeln!(w, "{},{},{},{}", s.t, s.node(i), s.f_plus[i], s.f_minus[i])?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Reaction {
    Switch { gamma_pm: f64, gamma_mp: f64 },
    Copy { beta: f64, kernel: EdgeKernel },
}

pub fn solve_model1(init: &DensityField, params: &Model1Params, cfg: &PdeConfig) -> Result<Trajectory> {
    params.validate()?;
    solve(init, Reaction::Switch { gamma_pm: params.gamma_pm, gamma_mp: params.gamma_mp }, cfg)
}

pub fn solve_model2(init: &DensityField, params: &Model2Params, cfg: &PdeConfig) -> Result<Trajectory> {
    params.validate()?;
    if !params.is_linear() {
        return Err(Error::Config("the nonlinear variant has no forward equation here (q_exp must be 1)".into()));
    }
    solve(init, Reaction::Copy { beta: params.beta, kernel: EdgeKernel::Linear(LinearKernel::from(params)) }, cfg)
}

pub fn solve_model3(init: &DensityField, params: &Model3Params, cfg: &PdeConfig) -> Result<Trajectory> {
    params.validate()?;
    solve(init, Reaction::Copy { beta: params.beta, kernel: EdgeKernel::Resulting(*params) }, cfg)
}

fn solve(init: &DensityField, reaction: Reaction, cfg: &PdeConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if init.cells() != cfg.cells {
        return Err(Error::Config(format!(
            "initial density has {} cells but the solver is set to {}",
            init.cells(),
            cfg.cells
        )));
    }
    let mut rhs = Rhs::new(cfg.cells, reaction);
    let m = cfg.cells + 1;
    let t0 = init.t;
    let mut t = t0;
    let mut fp = init.f_plus.clone();
    let mut fm = init.f_minus.clone();
    let (mut k1p, mut k1m) = (vec![0.0; m], vec![0.0; m]);
    let (mut k2p, mut k2m) = (vec![0.0; m], vec![0.0; m]);
    let (mut sp, mut sm) = (vec![0.0; m], vec![0.0; m]);
    let mut slices = vec![init.clone()];
    let max_dt = cfg.time_step();
    let mut k = 1u64;
    while t < t0 + cfg.horizon {
        let target = (t0 + k as f64 * cfg.output_every).min(t0 + cfg.horizon);
        let span = target - t;
        let steps = (span / max_dt).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for s in 0..steps {
            let ts = t + s as f64 * dt;
            // Heun: average of the Euler slope and the slope at the predictor
            rhs.eval(ts, &fp, &fm, &mut k1p, &mut k1m)?;
            for i in 0..m {
                sp[i] = fp[i] + dt * k1p[i];
                sm[i] = fm[i] + dt * k1m[i];
            }
            rhs.eval(ts + dt, &sp, &sm, &mut k2p, &mut k2m)?;
            for i in 0..m {
                fp[i] += 0.5 * dt * (k1p[i] + k2p[i]);
                fm[i] += 0.5 * dt * (k1m[i] + k2m[i]);
            }
        }
        t = target;
        slices.push(DensityField { t, f_plus: fp.clone(), f_minus: fm.clone() });
        k += 1;
    }
    Ok(Trajectory { slices })
}

/// Right-hand side of the conservative upwind discretisation.
///
/// Node `i` owns the dual cell `[u_i - h/2, u_i + h/2] ∩ [0, 1]`, so the
/// dual volumes are the trapezoid weights and the discrete mass is the
/// trapezoid integral. Fluxes sit on the dual interfaces `u_{i+1/2}`:
/// `(1 - u) f_+` is taken from the left node and `-u f_-` from the right
/// node. Both boundaries carry zero flux.
struct Rhs {
    cells: usize,
    h: f64,
    reaction: Reaction,
    alpha: Vec<f64>,
}

impl Rhs {
    fn new(cells: usize, reaction: Reaction) -> Self {
        Self { cells, h: 1.0 / cells as f64, reaction, alpha: vec![0.0; cells + 1] }
    }

    fn volume(&self, i: usize) -> f64 {
        if i == 0 || i == self.cells {
            0.5 * self.h
        } else {
            self.h
        }
    }

    fn eval(&mut self, t: f64, fp: &[f64], fm: &[f64], dp: &mut [f64], dm: &mut [f64]) -> Result<()> {
        dp.fill(0.0);
        dm.fill(0.0);
        for i in 0..self.cells {
            let u = (i as f64 + 0.5) * self.h;
            let flux_p = (1.0 - u) * fp[i];
            dp[i] -= flux_p;
            dp[i + 1] += flux_p;
            let flux_m = -u * fm[i + 1];
            dm[i] -= flux_m;
            dm[i + 1] += flux_m;
        }
        for i in 0..=self.cells {
            let v = self.volume(i);
            dp[i] /= v;
            dm[i] /= v;
        }
        match self.reaction {
            Reaction::Switch { gamma_pm, gamma_mp } => {
                for i in 0..=self.cells {
                    let r = gamma_mp * fm[i] - gamma_pm * fp[i];
                    dp[i] += r;
                    dm[i] -= r;
                }
            }
            Reaction::Copy { beta, kernel } => {
                alpha_profile_into(&kernel, t, fp, fm, &mut self.alpha)?;
                for i in 0..=self.cells {
                    let a = self.alpha[i];
                    let r = beta * (a * fm[i] - (1.0 - a) * fp[i]);
                    dp[i] += r;
                    dm[i] -= r;
                }
            }
        }
        Ok(())
    }
}

/// Alpha at every grid node of `densities`, at the slice time.
pub fn alpha_profile(kernel: &EdgeKernel, densities: &DensityField) -> Result<Vec<f64>> {
    let mut out = vec![0.0; densities.cells() + 1];
    alpha_profile_into(kernel, densities.t, &densities.f_plus, &densities.f_minus, &mut out)?;
    Ok(out)
}

/// Coefficients in `y` of an affine kernel `a + s y`.
type Affine = (f64, f64);

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[f64], q: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..q {
        out = poly_mul(&out, a);
    }
    out
}

/// `true` when the affine kernel stays inside `[0, 1]` on the unit square, so
/// no clamping happens and the kernel is an exact polynomial in `y`.
fn unclamped(k: &LinearKernel, t: f64) -> bool {
    let lo = k.offset(t);
    let hi = lo + 2.0 * k.slope();
    lo.min(hi) >= 0.0 && lo.max(hi) <= 1.0
}

fn alpha_profile_into(kernel: &EdgeKernel, t: f64, fp: &[f64], fm: &[f64], out: &mut [f64]) -> Result<()> {
    let cells = fp.len() - 1;
    let h = 1.0 / cells as f64;
    let weight = |i: usize| if i == 0 || i == cells { 0.5 * h } else { h };
    let exact_poly = match kernel {
        EdgeKernel::Linear(k) => unclamped(k, t),
        EdgeKernel::Resulting(p) => unclamped(&p.g_kernel(), t) && unclamped(&p.r_kernel(), t),
    };
    if !exact_poly {
        // direct quadrature, O(M^2)
        let field = DensityField { t, f_plus: fp.to_vec(), f_minus: fm.to_vec() };
        for (i, a) in out.iter_mut().enumerate() {
            *a = kernel.alpha(t, i as f64 * h, &field)?;
        }
        return Ok(());
    }
    let degree = match kernel {
        EdgeKernel::Linear(_) => 1,
        EdgeKernel::Resulting(p) => 2 * p.q as usize,
    };
    // trapezoid moments  sum_i w_i f(y_i) y_i^k
    let mut mp = vec![0.0; degree + 1];
    let mut mt = vec![0.0; degree + 1];
    for i in 0..=cells {
        let y = i as f64 * h;
        let (wp, wt) = (weight(i) * fp[i], weight(i) * (fp[i] + fm[i]));
        let mut pow = 1.0;
        for k in 0..=degree {
            mp[k] += wp * pow;
            mt[k] += wt * pow;
            pow *= y;
        }
    }
    for (i, a) in out.iter_mut().enumerate() {
        let u = i as f64 * h;
        let coeffs = match kernel {
            EdgeKernel::Linear(k) => vec![k.offset(t) + k.slope() * u, k.slope()],
            EdgeKernel::Resulting(p) => {
                let affine = |k: LinearKernel| -> Affine { (k.offset(t) + k.slope() * u, k.slope()) };
                let (g, r) = (affine(p.g_kernel()), affine(p.r_kernel()));
                let q = p.q;
                let a = poly_mul(&poly_pow(&[g.0, g.1], q), &poly_pow(&[1.0 - r.0, -r.1], q));
                let b = poly_mul(&poly_pow(&[r.0, r.1], q), &poly_pow(&[1.0 - g.0, -g.1], q));
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            }
        };
        let num: f64 = coeffs.iter().zip(&mp).map(|(c, m)| c * m).sum();
        let den: f64 = coeffs.iter().zip(&mt).map(|(c, m)| c * m).sum();
        if den < DEGENERATE_DENOMINATOR {
            return Err(Error::DegenerateKernel { u, denominator: den });
        }
        *a = (num / den).clamp(0.0, 1.0);
    }
    Ok(())
}
