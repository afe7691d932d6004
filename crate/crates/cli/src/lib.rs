//! Configuration, experiment registry and subcommands of the `covoter`
//! binary.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod output;

pub use config::Config;
pub use experiments::{Verdict, REGISTRY};
