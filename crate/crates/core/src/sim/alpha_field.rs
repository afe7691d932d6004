use std::sync::Arc;

use crate::error::{contract, Error, Result};
use crate::model::{DensityField, EdgeKernel};

/// Density trajectory with the kernel used to turn it into alpha.
///
/// Between stored slices alpha is interpolated linearly in time; at a stored
/// slice it is evaluated directly.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaField {
    slices: Vec<DensityField>,
    kernel: EdgeKernel,
}

/// Slack allowed when a query time sits just outside the stored range.
const TIME_SLACK: f64 = 1e-9;

impl AlphaField {
    pub fn new(slices: Vec<DensityField>, kernel: EdgeKernel) -> Result<Self> {
        if slices.is_empty() {
            return Err(contract("alpha field needs at least one density slice"));
        }
        if slices.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(contract("density slices must have increasing times"));
        }
        Ok(Self { slices, kernel })
    }

    pub fn start(&self) -> f64 {
        self.slices[0].t
    }

    pub fn end(&self) -> f64 {
        self.slices[self.slices.len() - 1].t
    }

    pub fn kernel(&self) -> &EdgeKernel {
        &self.kernel
    }

    pub fn slices(&self) -> &[DensityField] {
        &self.slices
    }

    pub fn covers(&self, from: f64, to: f64) -> bool {
        from >= self.start() - TIME_SLACK && to <= self.end() + TIME_SLACK
    }

    pub fn alpha(&self, t: f64, u: f64) -> Result<f64> {
        if !self.covers(t, t) {
            return Err(Error::Config(format!(
                "alpha requested at t = {t} outside density coverage [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let k = self.slices.partition_point(|s| s.t <= t);
        if k == 0 {
            return self.at_slice(0, u);
        }
        let lo = &self.slices[k - 1];
        if lo.t == t || k == self.slices.len() {
            return self.at_slice(k - 1, u);
        }
        let hi = &self.slices[k];
        let w = (t - lo.t) / (hi.t - lo.t);
        Ok((1.0 - w) * self.at_slice(k - 1, u)? + w * self.at_slice(k, u)?)
    }

    fn at_slice(&self, k: usize, u: f64) -> Result<f64> {
        let s = &self.slices[k];
        self.kernel.alpha(s.t, u, s)
    }
}

/// Where a mimicking vertex gets its `Plus` probability from.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSource {
    Field(Arc<AlphaField>),
    Constant(f64),
}

impl AlphaSource {
    pub fn eval(&self, t: f64, y: f64) -> Result<f64> {
        match self {
            AlphaSource::Field(f) => f.alpha(t, y),
            AlphaSource::Constant(a) => Ok(*a),
        }
    }

    /// Checks that `[from, to]` can be queried.
    pub fn check_coverage(&self, from: f64, to: f64) -> Result<()> {
        match self {
            AlphaSource::Field(f) if !f.covers(from, to) => Err(Error::Config(format!(
                "density trajectory covers [{}, {}] but the run needs [{from}, {to}]",
                f.start(),
                f.end()
            ))),
            AlphaSource::Constant(a) if !(0.0..=1.0).contains(a) => {
                Err(contract(format!("constant alpha {a} is not a probability")))
            }
            _ => Ok(()),
        }
    }
}
