//! Forward equations for the limiting type densities.
//!
//! The solvers advance the conservative system
//! `d_t f_+ + d_u[(1 - u) f_+] = R`, `d_t f_- + d_u[-u f_-] = -R`
//! where `R` is the net `- -> +` reaction: `g_mp f_- - g_pm f_+` for model 1
//! and `beta (alpha f_- - (1 - alpha) f_+)` for models 2 and 3.

mod matrix;
mod solver;
mod stationary;

pub use matrix::{expm_n, model1_m, model1_n, Matrix2};
pub use solver::{alpha_profile, solve_model1, solve_model2, solve_model3, PdeConfig, Trajectory};
pub use stationary::{series_coefficients, stationary_beta, stationary_model1, stationary_model2, stationary_residual};
