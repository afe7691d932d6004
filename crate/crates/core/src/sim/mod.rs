//! Event-driven simulation of the co-evolving processes and their mimicking
//! counterparts.
//!
//! All processes use an aggregate exponential race: a vertex category with
//! total rate `R_v` and an edge category with total rate `R_e`. Every draw is
//! keyed by the global event counter, so two simulations with the same seed
//! and the same total rates see identical clocks and identical decision
//! uniforms.

mod alpha_field;
mod coupling;
mod engine;
mod snapshot;

pub use alpha_field::{AlphaField, AlphaSource};
pub use coupling::{run_coupled, CouplingTrace};
pub use engine::{Flip, Simulation};
pub use snapshot::{canonical_permutation, Snapshot};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::model::{Model1Params, Model2Params, Model3Params, ModelParams};

/// Law of the initial opinions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OpinionLaw {
    AllPlus,
    AllMinus,
    /// Each vertex `Plus` independently with this probability.
    Bernoulli(f64),
    /// Exactly `floor(n / 2)` vertices `Plus` (the lowest indices).
    Balanced,
}

/// Law of the initial `y` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum YLaw {
    Constant(f64),
    Uniform,
}

/// Vertex count and initial laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub n: usize,
    pub opinions: OpinionLaw,
    pub y: YLaw,
}

impl InitialCondition {
    pub fn new(n: usize, opinions: OpinionLaw, y: YLaw) -> Self {
        Self { n, opinions, y }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(contract(format!("n = {} must be at least 2", self.n)));
        }
        if let OpinionLaw::Bernoulli(p) = self.opinions {
            if !(0.0..=1.0).contains(&p) {
                return Err(contract(format!("opinion probability {p} is not a probability")));
            }
        }
        if let YLaw::Constant(y) = self.y {
            if !(0.0..=1.0).contains(&y) {
                return Err(contract(format!("initial y = {y} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// What a model-2/3 vertex does when its clock rings and it has no
/// neighbour to copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ZeroNeighbourRule {
    /// Keep the current opinion.
    #[default]
    Keep,
    /// Adopt `Plus` with probability one half.
    FairCoin,
}

/// The simulated process.
#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    /// With `vertex_only` the edges are not simulated at all.
    Model1 { params: Model1Params, vertex_only: bool },
    Model2 { params: Model2Params, zero_rule: ZeroNeighbourRule },
    Model3 { params: Model3Params, zero_rule: ZeroNeighbourRule },
    /// Vertices follow `alpha`; edges resample with `(pi_x + pi_y) / 2`.
    Mimic2 { params: Model2Params, alpha: AlphaSource },
    /// Vertices follow `alpha`; the resulting graph is resampled directly with
    /// `2 [s (2 - s) / 4]^q`, `s = p(x_i) + p(x_j)`.
    Mimic3 { params: Model3Params, alpha: AlphaSource, p_plus: f64, p_minus: f64 },
}

impl Process {
    pub fn model1(params: Model1Params) -> Self {
        Process::Model1 { params, vertex_only: false }
    }

    pub fn model2(params: Model2Params) -> Self {
        Process::Model2 { params, zero_rule: ZeroNeighbourRule::Keep }
    }

    pub fn model3(params: Model3Params) -> Self {
        Process::Model3 { params, zero_rule: ZeroNeighbourRule::Keep }
    }

    /// Real process for any parameter set.
    pub fn from_params(params: ModelParams) -> Self {
        match params {
            ModelParams::Model1(p) => Process::model1(p),
            ModelParams::Model2(p) => Process::model2(p),
            ModelParams::Model3(p) => Process::model3(p),
        }
    }

    /// Mimicking process of model 3 with `p(x) = (pi^g_x + pi^r_x) / 2`.
    pub fn mimic3(params: Model3Params, alpha: AlphaSource) -> Self {
        Process::Mimic3 {
            params,
            alpha,
            p_plus: 0.5 * (params.pi_plus_g + params.pi_plus_r),
            p_minus: 0.5 * (params.pi_minus_g + params.pi_minus_r),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Process::Model1 { params, .. } => params.validate(),
            Process::Model2 { params, .. } | Process::Mimic2 { params, .. } => params.validate(),
            Process::Model3 { params, .. } => params.validate(),
            Process::Mimic3 { params, p_plus, p_minus, .. } => {
                params.validate()?;
                for p in [p_plus, p_minus] {
                    if !(0.0..=1.0).contains(p) {
                        return Err(contract(format!("mimicking edge parameter {p} is not a probability")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn p0(&self) -> f64 {
        match self {
            Process::Model1 { params, .. } => params.p0,
            Process::Model2 { params, .. } | Process::Mimic2 { params, .. } => params.p0,
            Process::Model3 { params, .. } | Process::Mimic3 { params, .. } => params.p0,
        }
    }

    /// Number of layered copies sampled at initialisation.
    pub(crate) fn init_layers(&self) -> usize {
        match self {
            Process::Model3 { params, .. } | Process::Mimic3 { params, .. } => 2 * params.q as usize,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests;
