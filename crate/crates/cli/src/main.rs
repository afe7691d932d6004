use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use covoter_cli::experiments::registry_listing;
use covoter_cli::{commands, Config};

#[derive(Parser)]
#[command(name = "covoter", version, about = "Co-evolving voter model simulations and limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run of a model.
    Simulate(Common),
    /// Solve the density equations of a model.
    Pde(Common),
    /// Distances between two stored graphons (`graphon_a`, `graphon_b`).
    Graphon(Common),
    /// Run a registered experiment.
    Experiment {
        /// Experiment name; falls back to the `experiment` key.
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List the registered experiments.
    List,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a key, `--set key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the `out` key, then `out/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::new(),
        };
        for s in &self.set {
            cfg.apply_override(s)?;
        }
        if let Some(seed) = self.seed {
            cfg.set("seed", &seed.to_string())?;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &Config, fallback: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.text("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out").join(fallback))
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            commands::simulate(&cfg, &c.out_dir(&cfg, "simulate"))?;
        }
        Command::Pde(c) => {
            let cfg = c.load()?;
            commands::pde(&cfg, &c.out_dir(&cfg, "pde"))?;
        }
        Command::Graphon(c) => {
            let cfg = c.load()?;
            let d = commands::graphon(&cfg, &c.out_dir(&cfg, "graphon"))?;
            println!("l1 = {}\ncut = {} ({})", d.l1, d.cut, d.cut_method);
        }
        Command::Experiment { name, common } => {
            let cfg = common.load()?;
            let Some(name) = name.or_else(|| cfg.text("experiment").map(str::to_string)) else {
                bail!("no experiment named; registered experiments:\n{}", registry_listing());
            };
            let out = common.out_dir(&cfg, &name);
            let v = commands::experiment(&name, &cfg, &out)?;
            println!(
                "{} {}: {} = {} (threshold {}), {:.2} s",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.metric,
                v.value,
                v.threshold,
                v.runtime_s
            );
            if let Some(note) = &v.note {
                println!("note: {note}");
            }
            return Ok(v.pass);
        }
        Command::List => print!("{}", registry_listing()),
    }
    Ok(true)
}

fn exit_code(result: Result<bool>) -> ExitCode {
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    exit_code(run(Cli::parse()))
}
