//! Domain types shared by the simulator, the forward-equation solvers and
//! the graphon tools.

mod density;
mod kernel;
mod rng;

pub use density::{alpha, alpha_tilde, quantile, DensityField, QuantileMap, DEGENERATE_DENOMINATOR, MASS_TOL, NEGATIVITY_TOL};
pub use kernel::{kernel_h, kernel_hr, EdgeKernel, LinearKernel};
pub use rng::{EntityKind, RngStream};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// A vertex opinion. `Plus` sorts before `Minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Opinion {
    Plus,
    Minus,
}

impl Opinion {
    pub fn flipped(self) -> Self {
        match self {
            Opinion::Plus => Opinion::Minus,
            Opinion::Minus => Opinion::Plus,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Opinion::Plus
    }
}

/// Opinion plus the exponentially discounted occupation time of `Plus`.
///
/// `y` is only current as of `last_update`; the simulator advances it lazily.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexState {
    pub opinion: Opinion,
    pub y: f64,
    pub y0: f64,
    pub last_update: f64,
}

impl VertexState {
    pub fn new(opinion: Opinion, y0: f64) -> Self {
        Self { opinion, y: y0, y0, last_update: 0.0 }
    }

    /// Brings `y` forward to time `t` without changing the opinion.
    pub fn advance_to(&mut self, t: f64) {
        if t > self.last_update {
            self.y = step_y(self.y, self.opinion, t - self.last_update);
            self.last_update = t;
        }
    }

    /// `y - e^{-t} y0`, the part of `y` generated by the opinion path.
    pub fn type_at(&self, t: f64) -> f64 {
        type_of(self.y, self.y0, t)
    }
}

/// Type of a vertex with current value `y` and initial value `y0` at time `t`,
/// clamped to `[0, 1 - e^{-t}]`.
pub fn type_of(y: f64, y0: f64, t: f64) -> f64 {
    let decay = (-t).exp();
    (y - decay * y0).clamp(0.0, 1.0 - decay)
}

#[inline]
fn step_y(y: f64, opinion: Opinion, dt: f64) -> f64 {
    let decay = (-dt).exp();
    let next = match opinion {
        Opinion::Plus => 1.0 - (1.0 - y) * decay,
        Opinion::Minus => y * decay,
    };
    next.clamp(0.0, 1.0)
}

/// Exact flow of `y' = 1 - y` (opinion `Plus`) or `y' = -y` (opinion `Minus`).
pub fn advance_y(y: f64, opinion: Opinion, dt: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(contract(format!("y = {y} outside [0, 1]")));
    }
    if !(dt >= 0.0) {
        return Err(contract(format!("dt = {dt} must be nonnegative")));
    }
    Ok(step_y(y, opinion, dt))
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(contract(format!("{name} = {p} is not a probability")))
    }
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(contract(format!("{name} = {r} must be a positive finite rate")))
    }
}

/// One-way feedback: opinions flip at fixed rates, edges follow opinions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model1Params {
    /// Rate of `+ -> -`.
    pub gamma_pm: f64,
    /// Rate of `- -> +`.
    pub gamma_mp: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
    pub p0: f64,
}

impl Model1Params {
    pub fn validate(&self) -> Result<()> {
        check_rate("gamma_pm", self.gamma_pm)?;
        check_rate("gamma_mp", self.gamma_mp)?;
        check_probability("pi_plus", self.pi_plus)?;
        check_probability("pi_minus", self.pi_minus)?;
        check_probability("p0", self.p0)
    }

    /// Stationary fraction of `Plus`, `gamma_mp / (gamma_pm + gamma_mp)`.
    pub fn stationary_plus(&self) -> f64 {
        self.gamma_mp / (self.gamma_pm + self.gamma_mp)
    }
}

/// Two-way feedback: vertices copy a random neighbour at rate `beta`.
///
/// `q_exp > 1` selects the nonlinear variant where disagreeing pairs connect
/// with probability `((pi_plus + pi_minus) / 2)^q_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model2Params {
    pub beta: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
    pub p0: f64,
    pub q_exp: f64,
}

impl Model2Params {
    pub fn linear(beta: f64, pi_plus: f64, pi_minus: f64, p0: f64) -> Self {
        Self { beta, pi_plus, pi_minus, p0, q_exp: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("beta", self.beta)?;
        check_probability("pi_plus", self.pi_plus)?;
        check_probability("pi_minus", self.pi_minus)?;
        check_probability("p0", self.p0)?;
        if !(self.q_exp >= 1.0 && self.q_exp.is_finite()) {
            return Err(contract(format!("q_exp = {} must be >= 1", self.q_exp)));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.q_exp == 1.0
    }
}

/// `2q` layered copies of the second model; `q` g-layers and `q` r-layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model3Params {
    pub beta: f64,
    pub q: u32,
    pub pi_plus_g: f64,
    pub pi_minus_g: f64,
    pub pi_plus_r: f64,
    pub pi_minus_r: f64,
    pub p0: f64,
}

impl Model3Params {
    pub fn validate(&self) -> Result<()> {
        check_rate("beta", self.beta)?;
        if self.q == 0 {
            return Err(contract("q must be at least 1"));
        }
        check_probability("pi_plus_g", self.pi_plus_g)?;
        check_probability("pi_minus_g", self.pi_minus_g)?;
        check_probability("pi_plus_r", self.pi_plus_r)?;
        check_probability("pi_minus_r", self.pi_minus_r)?;
        check_probability("p0", self.p0)
    }

    pub fn g_kernel(&self) -> LinearKernel {
        LinearKernel { p0: self.p0, pi_plus: self.pi_plus_g, pi_minus: self.pi_minus_g }
    }

    pub fn r_kernel(&self) -> LinearKernel {
        LinearKernel { p0: self.p0, pi_plus: self.pi_plus_r, pi_minus: self.pi_minus_r }
    }
}

/// Parameters of any of the simulated processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Model1(Model1Params),
    /// Linear (`q_exp == 1`) or nonlinear second model.
    Model2(Model2Params),
    Model3(Model3Params),
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Model1(p) => p.validate(),
            ModelParams::Model2(p) => p.validate(),
            ModelParams::Model3(p) => p.validate(),
        }
    }

    pub fn p0(&self) -> f64 {
        match self {
            ModelParams::Model1(p) => p.p0,
            ModelParams::Model2(p) => p.p0,
            ModelParams::Model3(p) => p.p0,
        }
    }

    /// Kernel of the limiting reference graphon. Only defined for the
    /// linear models; the nonlinear variant has no type kernel.
    pub fn edge_kernel(&self) -> Option<EdgeKernel> {
        match *self {
            ModelParams::Model1(p) => Some(EdgeKernel::Linear(LinearKernel::from(&p))),
            ModelParams::Model2(p) if p.is_linear() => Some(EdgeKernel::Linear(LinearKernel::from(&p))),
            ModelParams::Model2(_) => None,
            ModelParams::Model3(p) => Some(EdgeKernel::Resulting(p)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint quadrature of `e^{-t} y0 + int_0^t e^{-s} 1{x(t-s) = +} ds`
    /// for a piecewise-constant opinion path.
    fn y_by_quadrature(y0: f64, switches: &[(f64, Opinion)], t: f64, steps: usize) -> f64 {
        let opinion_at = |s: f64| {
            let mut o = switches[0].1;
            for &(ts, os) in switches {
                if ts <= s {
                    o = os;
                }
            }
            o
        };
        let h = t / steps as f64;
        let mut acc = 0.0;
        for k in 0..steps {
            let s = (k as f64 + 0.5) * h;
            if opinion_at(t - s).is_plus() {
                acc += (-s).exp() * h;
            }
        }
        (-t).exp() * y0 + acc
    }

    #[test]
    fn advance_y_examples() {
        for dt in [0.0, 0.3, 1.0, 4.0] {
            let p = advance_y(0.0, Opinion::Plus, dt).unwrap();
            assert!((p - (1.0 - (-dt as f64).exp())).abs() < 1e-15);
            let m = advance_y(0.7, Opinion::Minus, dt).unwrap();
            assert!((m - 0.7 * (-dt as f64).exp()).abs() < 1e-15);
        }
        let v = advance_y(0.5, Opinion::Plus, 2f64.ln()).unwrap();
        let oracle = y_by_quadrature(0.5, &[(0.0, Opinion::Plus)], 2f64.ln(), 200_000);
        assert!((oracle - 0.75).abs() < 1e-9);
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn advance_y_rejects_bad_input() {
        assert!(matches!(advance_y(0.5, Opinion::Plus, -1.0), Err(crate::Error::Contract(_))));
        assert!(advance_y(1.5, Opinion::Plus, 1.0).is_err());
        assert!(advance_y(f64::NAN, Opinion::Minus, 1.0).is_err());
    }

    #[test]
    fn advance_y_is_a_flow() {
        for y in [0.0, 0.3, 1.0] {
            for a in [0.1, 1.0, 5.0] {
                for b in [0.1, 1.0, 5.0] {
                    for o in [Opinion::Plus, Opinion::Minus] {
                        let two = advance_y(advance_y(y, o, a).unwrap(), o, b).unwrap();
                        let one = advance_y(y, o, a + b).unwrap();
                        assert!((two - one).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn piecewise_path_matches_quadrature() {
        let path = [(0.0, Opinion::Minus), (0.4, Opinion::Plus), (1.1, Opinion::Minus), (2.0, Opinion::Plus)];
        let mut v = VertexState::new(Opinion::Minus, 0.35);
        for w in path.windows(2) {
            v.advance_to(w[1].0);
            v.opinion = w[1].1;
        }
        v.advance_to(2.7);
        // exact integral of e^{-(t-s)} over the Plus segments
        let ends = [0.4f64, 1.1, 2.0, 2.7];
        let mut oracle = (-2.7f64).exp() * 0.35;
        for (k, w) in path.iter().enumerate() {
            if w.1.is_plus() {
                oracle += (-(2.7 - ends[k])).exp() - (-(2.7 - w.0)).exp();
            }
        }
        assert!((v.y - oracle).abs() < 1e-9, "{} vs {}", v.y, oracle);
        let ty = v.type_at(2.7);
        assert!(ty >= 0.0 && ty <= 1.0 - (-2.7f64).exp());
    }

    #[test]
    fn opinion_order() {
        assert!(Opinion::Plus < Opinion::Minus);
        assert_eq!(Opinion::Plus.flipped(), Opinion::Minus);
    }

    #[test]
    fn params_validation() {
        let ok = Model1Params { gamma_pm: 1.5, gamma_mp: 1.0, pi_plus: 0.9, pi_minus: 0.1, p0: 0.05 };
        assert!(ok.validate().is_ok());
        assert!((ok.stationary_plus() - 0.4).abs() < 1e-15);
        assert!(Model1Params { gamma_pm: 0.0, ..ok }.validate().is_err());
        assert!(Model1Params { p0: 1.2, ..ok }.validate().is_err());
        let m2 = Model2Params { q_exp: 0.5, ..Model2Params::linear(0.66, 0.9, 0.1, 0.05) };
        assert!(m2.validate().is_err());
        let m3 = Model3Params { beta: 0.5, q: 0, pi_plus_g: 0.9, pi_minus_g: 0.1, pi_plus_r: 0.1, pi_minus_r: 0.9, p0: 0.05 };
        assert!(m3.validate().is_err());
        assert!(Model3Params { q: 2, ..m3 }.validate().is_ok());
    }
}
