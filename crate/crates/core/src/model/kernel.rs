//! Edge-connection kernels: the probability that two vertices of given
//! types share an active edge at time `t`.

use serde::{Deserialize, Serialize};

use super::{Model1Params, Model2Params, Model3Params};
use crate::error::{contract, Result};

const TYPE_TOL: f64 = 1e-12;

/// Kernel of the linear edge rule `½(π_{x_i} + π_{x_j})` with initial
/// density `p0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearKernel {
    pub p0: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
}

impl From<&Model1Params> for LinearKernel {
    fn from(p: &Model1Params) -> Self {
        Self { p0: p.p0, pi_plus: p.pi_plus, pi_minus: p.pi_minus }
    }
}

impl From<&Model2Params> for LinearKernel {
    fn from(p: &Model2Params) -> Self {
        Self { p0: p.p0, pi_plus: p.pi_plus, pi_minus: p.pi_minus }
    }
}

impl LinearKernel {
    /// Slope in each type argument.
    pub fn slope(&self) -> f64 {
        0.5 * (self.pi_plus - self.pi_minus)
    }

    /// Value at `u = v = 0`; `H(t;u,v) = offset(t) + slope * (u + v)`.
    pub fn offset(&self, t: f64) -> f64 {
        let decay = (-t).exp();
        decay * self.p0 + self.pi_minus * (1.0 - decay)
    }

    /// Kernel value without range checks, clamped to `[0, 1]`.
    ///
    /// Grid code evaluates the kernel on `y` values, which can exceed the
    /// type range `[0, 1 - e^{-t}]` at small `t`.
    #[inline]
    pub fn eval(&self, t: f64, u: f64, v: f64) -> f64 {
        (self.offset(t) + self.slope() * (u + v)).clamp(0.0, 1.0)
    }
}

/// Kernel of the resulting graph of the layered model.
fn resulting(p: &Model3Params, t: f64, u: f64, v: f64) -> f64 {
    let hg = p.g_kernel().eval(t, u, v);
    let hr = p.r_kernel().eval(t, u, v);
    let q = p.q as i32;
    (hg.powi(q) * (1.0 - hr).powi(q) + hr.powi(q) * (1.0 - hg).powi(q)).clamp(0.0, 1.0)
}

/// Either the linear kernel of models 1 and 2 or the resulting-graph kernel
/// of model 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeKernel {
    Linear(LinearKernel),
    Resulting(Model3Params),
}

impl EdgeKernel {
    #[inline]
    pub fn eval(&self, t: f64, u: f64, v: f64) -> f64 {
        match self {
            EdgeKernel::Linear(k) => k.eval(t, u, v),
            EdgeKernel::Resulting(p) => resulting(p, t, u, v),
        }
    }
}

fn check_types(t: f64, u: f64, v: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(contract(format!("t = {t} must be nonnegative")));
    }
    let hi = 1.0 - (-t).exp() + TYPE_TOL;
    for (name, x) in [("u", u), ("v", v)] {
        if !(x >= -TYPE_TOL && x <= hi) {
            return Err(contract(format!("{name} = {x} outside the type range [0, 1 - e^-t] at t = {t}")));
        }
    }
    Ok(())
}

/// Probability of an active edge between types `u` and `v` at time `t`
/// under the linear edge rule. `t` may be `f64::INFINITY`.
pub fn kernel_h(t: f64, u: f64, v: f64, kernel: &LinearKernel) -> Result<f64> {
    check_types(t, u, v)?;
    Ok(kernel.eval(t, u, v))
}

/// Resulting-graph edge probability
/// `H_g^q (1 - H_r)^q + H_r^q (1 - H_g)^q`.
pub fn kernel_hr(t: f64, u: f64, v: f64, params: &Model3Params) -> Result<f64> {
    check_types(t, u, v)?;
    Ok(resulting(params, t, u, v))
}
