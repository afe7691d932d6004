//! Co-evolving voter models on dense dynamic graphs.
//!
//! [`model`] holds the shared domain types and the edge kernels, [`sim`]
//! runs the stochastic processes, and [`pde`], [`graphon`] and [`stats`]
//! compute the deterministic limits and the observables that compare the
//! two.

pub mod error;
pub mod graph;
pub mod graphon;
pub mod model;
pub mod pde;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use graph::EdgeSet;
pub use graphon::StepGraphon;
pub use model::{
    advance_y, alpha, alpha_tilde, kernel_h, kernel_hr, quantile, DensityField, EdgeKernel, EntityKind,
    LinearKernel, Model1Params, Model2Params, Model3Params, ModelParams, Opinion, RngStream, VertexState,
};
pub use pde::{Matrix2, PdeConfig, Trajectory};
pub use sim::{InitialCondition, OpinionLaw, Process, Simulation, Snapshot, YLaw, ZeroNeighbourRule};
pub use stats::Histogram;
